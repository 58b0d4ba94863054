#pragma once

#include <array>

namespace contagion::reference {

/// Embedded reference dataset: previously published initial-strategy tables
/// for the two-name model, used only for comparison output (`table
/// --compare`) and the acceptance report. Never an input to any solve.

inline constexpr std::array<double, 5> kGammaColumns = {-0.5, -0.1, 0.0, 0.5, 1.0};

struct TableBlock {
    double a1;
    double a2;
    double beta;
    double rho;
    double survival_corr;      // reported rho^s for the block
    double merton;             // reported benchmark column (same for both names)
    std::array<double, 5> pi1; // per gamma column
    std::array<double, 5> pi2;
};

/// Strategy table across default intensities (rho = 0, beta = 2).
inline constexpr std::array<TableBlock, 3> kTable1 = {{
    {0.01, 0.1, 2.0, 0.0, 0.2936, 2.0,
     {0.462, 1.659, 1.892, 2.621, 2.832},
     {-1.047, -0.709, -0.498, 0.623, 1.168}},
    {0.1, 0.1, 2.0, 0.0, 0.5736, 2.0,
     {-0.353, -0.210, -0.147, 0.556, 2.0},
     {-0.353, -0.210, -0.147, 0.556, 2.0}},
    {0.3, 0.1, 2.0, 0.0, 0.4555, 2.0,
     {-1.723, -1.719, -1.647, -0.697, 1.293},
     {-0.132, 0.453, 0.521, 1.121, 2.707}},
}};

/// Strategy table across correlations (a1 = 0.01, a2 = 0.1).
inline constexpr std::array<TableBlock, 4> kTable2 = {{
    {0.01, 0.1, 1.0, 0.0, 0.0, 2.0,
     {0.228, 0.942, 1.099, 1.966, 2.459},
     {-0.867, -0.452, -0.278, 0.856, 1.541}},
    {0.01, 0.1, 2.0, 0.0, 0.2936, 2.0,
     {0.462, 1.659, 1.892, 2.621, 2.832},
     {-1.047, -0.709, -0.498, 0.623, 1.168}},
    {0.01, 0.1, 1.0, 0.3, 0.0, 1.539,
     {0.492, 1.081, 1.188, 1.715, 2.025},
     {-0.959, -0.504, -0.348, 0.519, 1.052}},
    {0.01, 0.1, 2.0, 0.3, 0.2936, 1.539,
     {0.863, 1.939, 2.077, 2.399, 2.450},
     {-1.235, -0.817, -0.626, 0.216, 0.627}},
}};

/// Reference survival correlations quoted alongside the tables.
inline constexpr double kSurvCorr_a001_a01 = 0.2936;   // a = (0.01, 0.1), beta = 2
inline constexpr double kSurvCorr_a01_a01 = 0.5736;    // a = (0.1, 0.1), beta = 2
inline constexpr double kSurvCorr_a03_a01 = 0.4555;    // a = (0.3, 0.1), beta = 2
inline constexpr double kSurvCorr_a001_a001 = 0.5846;  // a = (0.01, 0.01), beta = 2

}  // namespace contagion::reference
