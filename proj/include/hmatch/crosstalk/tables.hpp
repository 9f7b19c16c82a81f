#pragma once

#include <array>
#include <cmath>
#include <string_view>

namespace hmatch::crosstalk {

inline constexpr int kNumStates = 18;
inline constexpr int kNumInputs = 31;
inline constexpr int kNumOutputs = 32;

/// Cytosol-to-membrane volume ratio, fixed for the whole analysis.
inline constexpr double kLambda = 6.0;

enum State : int {
  s_Auxin = 0,
  s_X,
  s_PLSp,
  s_Ra,
  s_Ras,     // Ra*
  s_CK,
  s_ET,
  s_PLSm,
  s_Re,
  s_Res,     // Re*
  s_CTR1,
  s_CTR1s,   // CTR1*
  s_PIN1m,
  s_PIN1pi,
  s_PIN1pm,
  s_IAA,
  s_cytokinin,
  s_ACC,
};

inline constexpr std::array<std::string_view, kNumStates> kStateNames = {
    "Auxin", "X",  "PLSp", "Ra",   "Ra*",   "CK",    "ET",     "PLSm",  "Re",
    "Re*",   "CTR1", "CTR1*", "PIN1m", "PIN1pi", "PIN1pm", "IAA", "cytokinin", "ACC"};

/// Initial concentrations for every species except the fed chemicals, which
/// are 0 or 1 according to the feeding regime.
inline constexpr std::array<double, kNumStates> kInitialConcentration = {
    0.1, 0.1, 0.1, 0.0, 1.0, 0.1, 0.1, 0.1, 0.0, 0.3, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

enum Input : int {
  in_k1 = 0,
  in_k1a_k2,
  in_k2a_k2,
  in_k2b,
  in_k2c,
  in_k3_k2,
  in_k3a_k2,
  in_k3auxin,
  in_k5_k4,
  in_k6a,
  in_k6w_k7,
  in_k9_k8,
  in_k10a_k10,
  in_k11_k10,
  in_k12a_k12,
  in_k13_k12,
  in_k15_k14,
  in_k17_k16a,
  in_k19_k18a,
  in_k18,
  in_k20a_k1v21,
  in_k20b,
  in_k20c,
  in_k22a_k1v23,
  in_k25a_k1v24,
  in_k25b,
  in_VIAA,
  in_VCK,
  in_VACC,
  in_k6m,
  in_k11m,
};

struct InputRange {
  std::string_view name;
  double initial;
  double lo;
  double hi;
};

/// Rate-parameter ratios searched over; each maps to [-1,1] on a log scale.
/// The composite feeding inputs are V/(denominator*(Km+1)) for the fed value
/// of 1 of the respective reservoir chemical.
inline constexpr std::array<InputRange, kNumInputs> kInputTable = {{
    {"k1", 1, 0.1, 10},
    {"k1a_k2", 5, 0.5, 50},
    {"k2a_k2", 14, 1.4, 140},
    {"k2b", 1, 0.1, 10},
    {"k2c", 0.01, 0.000001, 0.1},
    {"k3_k2", 10, 1, 100},
    {"k3a_k2", 2.25, 0.225, 22.5},
    {"k3auxin", 10, 1, 100},
    {"k5_k4", 1, 0.1, 10},
    {"k6a", 0.2, 0.002, 2000},
    {"k6w_k7", 0.3, 0.03, 3},
    {"k9_k8", 1, 0.1, 10},
    {"k10a_k10", 16600, 166, 16600},
    {"k11_k10", 16600, 16.6, 166000},
    {"k12a_k12", 1, 0.1, 10},
    {"k13_k12", 10, 1, 1000},
    {"k15_k14", 0.0283, 0.000283, 0.283},
    {"k17_k16a", 0.1, 0.01, 1},
    {"k19_k18a", 1, 0.1, 10},
    {"k18", 0.1, 0.01, 10},
    {"k20a_k1v21", 0.8, 0.08, 8},
    {"k20b", 1, 0.1, 10},
    {"k20c", 0.3, 0.03, 3},
    {"k22a_k1v23", 1.35, 0.135, 13.5},
    {"k25a_k1v24", 0.1, 0.01, 1},
    {"k25b", 1, 0.1, 10},
    {"VIAA_comp", 2.27, 0.05, 50},
    {"VCK_comp", 0.45, 0.01, 1},
    {"VACC_comp", 4.55, 0.1, 100},
    {"k6m", 1.5, 1, 4},
    {"k11m", 0.006, 0.001, 0.1},
}};

/// Maps one scaled coordinate in [-1,1] to its natural (ratio) value.
inline double input_to_natural(int i, double x) {
  const auto& r = kInputTable[static_cast<std::size_t>(i)];
  const double lo = std::log(r.lo), hi = std::log(r.hi);
  return std::exp(lo + 0.5 * (x + 1.0) * (hi - lo));
}

/// Inverse of input_to_natural.
inline double input_to_scaled(int i, double value) {
  const auto& r = kInputTable[static_cast<std::size_t>(i)];
  const double lo = std::log(r.lo), hi = std::log(r.hi);
  return 2.0 * (std::log(value) - lo) / (hi - lo) - 1.0;
}

enum class Mutant { wild_type, pls, plsox, etr1, pls_etr1 };

struct Feeding {
  bool auxin = false;      // IAA reservoir present
  bool cytokinin = false;  // cytokinin reservoir present
  bool ethylene = false;   // ACC reservoir present

  friend bool operator==(const Feeding&, const Feeding&) = default;
};

struct ExperimentSpec {
  Mutant mutant = Mutant::wild_type;
  Feeding feeding;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

enum class Chemical { auxin, ck, et, plsm, pin };

/// One experimental comparison: log of the steady-state concentration of
/// `chem` under `num`, minus the same under `ref` when is_ratio is set.
/// [log_lo, log_hi] is the observation window accepted at implausibility 3.
struct OutputDef {
  std::string_view id;
  char dataset;
  Chemical chem;
  ExperimentSpec num;
  ExperimentSpec ref;
  bool is_ratio;
  bool trend;  // observation was a qualitative trend rather than a value
  double log_lo;
  double log_hi;
};

namespace detail {
inline constexpr ExperimentSpec wt_none{Mutant::wild_type, {}};
inline constexpr ExperimentSpec pls_none{Mutant::pls, {}};
inline constexpr ExperimentSpec plsox_none{Mutant::plsox, {}};
inline constexpr ExperimentSpec etr1_none{Mutant::etr1, {}};
inline constexpr ExperimentSpec plsetr1_none{Mutant::pls_etr1, {}};
inline constexpr ExperimentSpec wt_fa{Mutant::wild_type, {true, false, false}};
inline constexpr ExperimentSpec wt_fc{Mutant::wild_type, {false, true, false}};
inline constexpr ExperimentSpec wt_fe{Mutant::wild_type, {false, false, true}};
inline constexpr ExperimentSpec pls_fe{Mutant::pls, {false, false, true}};
inline constexpr ExperimentSpec wt_fafc{Mutant::wild_type, {true, true, false}};
inline constexpr ExperimentSpec wt_fafe{Mutant::wild_type, {true, false, true}};
}  // namespace detail

/// The 32 experimental outputs, in fixed export order.
inline constexpr std::array<OutputDef, kNumOutputs> kOutputTable = {{
    // id, dataset, chemical, numerator, reference, ratio?, trend?, window
    {"wt_Auxin", 'A', Chemical::auxin, detail::wt_none, detail::wt_none, false, false, -3.772, 0.833},
    {"pls_Auxin", 'A', Chemical::auxin, detail::pls_none, detail::wt_none, true, false, -1.531, 0.366},
    {"PLSox_Auxin", 'A', Chemical::auxin, detail::plsox_none, detail::wt_none, true, false, -0.576, 0.708},
    {"etr1_Auxin", 'A', Chemical::auxin, detail::etr1_none, detail::wt_none, true, true, 0.182, 2.303},
    {"plsetr1_Auxin", 'A', Chemical::auxin, detail::plsetr1_none, detail::wt_none, true, false, -0.792, 0.600},
    {"fa_Auxin", 'A', Chemical::auxin, detail::wt_fa, detail::wt_none, true, true, 0.182, 2.303},
    {"fc_Auxin", 'A', Chemical::auxin, detail::wt_fc, detail::wt_none, true, false, -2.303, 1.099},
    {"fe_Auxin", 'B', Chemical::auxin, detail::wt_fe, detail::wt_none, true, true, 0.182, 2.303},
    {"pls_fe_Auxin", 'B', Chemical::auxin, detail::pls_fe, detail::pls_none, true, false, -1.204, -0.010},
    {"wt_CK", 'A', Chemical::ck, detail::wt_none, detail::wt_none, false, false, -3.730, 0.875},
    {"pls_CK", 'A', Chemical::ck, detail::pls_none, detail::wt_none, true, false, 0.049, 1.253},
    {"PLSox_CK", 'A', Chemical::ck, detail::plsox_none, detail::wt_none, true, true, -2.303, -0.182},
    {"fa_CK", 'A', Chemical::ck, detail::wt_fa, detail::wt_none, true, true, -2.303, -0.182},
    {"fc_CK", 'A', Chemical::ck, detail::wt_fc, detail::wt_none, true, true, 0.182, 2.303},
    {"fe_CK", 'B', Chemical::ck, detail::wt_fe, detail::wt_none, true, true, -2.303, -0.182},
    {"pls_ET", 'A', Chemical::et, detail::pls_none, detail::wt_none, true, true, -0.342, 0.336},
    {"PLSox_ET", 'A', Chemical::et, detail::plsox_none, detail::wt_none, true, true, -0.342, 0.336},
    {"fa_ET", 'A', Chemical::et, detail::wt_fa, detail::wt_none, true, true, 0.182, 2.303},
    {"fc_ET", 'A', Chemical::et, detail::wt_fc, detail::wt_none, true, true, 0.182, 2.303},
    {"fe_ET", 'B', Chemical::et, detail::wt_fe, detail::wt_none, true, true, 0.182, 2.303},
    {"fa_PLSm", 'C', Chemical::plsm, detail::wt_fa, detail::wt_none, true, true, 0.182, 2.303},
    {"fc_PLSm", 'C', Chemical::plsm, detail::wt_fc, detail::wt_none, true, true, -2.303, -0.182},
    {"fe_PLSm", 'C', Chemical::plsm, detail::wt_fe, detail::wt_none, true, true, -2.303, -0.182},
    {"fafc_PLSm", 'C', Chemical::plsm, detail::wt_fafc, detail::wt_none, true, false, -0.554, 3.449},
    {"fafe_PLSm", 'C', Chemical::plsm, detail::wt_fafe, detail::wt_none, true, false, 0.207, 3.315},
    {"pls_PIN", 'A', Chemical::pin, detail::pls_none, detail::wt_none, true, false, -0.650, 1.007},
    {"PLSox_PIN", 'A', Chemical::pin, detail::plsox_none, detail::wt_none, true, false, -1.629, 0.456},
    {"etr1_PIN", 'A', Chemical::pin, detail::etr1_none, detail::wt_none, true, false, -1.892, 0.182},
    {"plsetr1_PIN", 'A', Chemical::pin, detail::plsetr1_none, detail::wt_none, true, false, -1.175, 0.613},
    {"fa_PIN", 'A', Chemical::pin, detail::wt_fa, detail::wt_none, true, true, 0.182, 2.303},
    {"fc_PIN", 'A', Chemical::pin, detail::wt_fc, detail::wt_none, true, true, -2.303, -0.182},
    {"fe_PIN", 'B', Chemical::pin, detail::wt_fe, detail::wt_none, true, false, -0.730, 0.893},
}};

inline int output_index(std::string_view id) {
  for (int i = 0; i < kNumOutputs; ++i)
    if (kOutputTable[static_cast<std::size_t>(i)].id == id) return i;
  return -1;
}

}  // namespace hmatch::crosstalk
