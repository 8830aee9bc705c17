#pragma once

#include <string>
#include <vector>

#include "mlkol/config.hpp"

namespace mlkol {

/// Per-row regularization for the contour estimators. Rows 1..y_max
/// (1-based) are learned, lambdas[j-1] is the coefficient of row j.
struct LambdaSchedule {
    int y_max = 0;
    std::vector<double> lambdas;
    bool clamped = false;
};

/// One rectangle of the multilevel staircase. Rows are 1-based and
/// half-open: [row_begin, row_end).
struct Level {
    double x = 0.0;
    double y = 0.0;  // unclamped contour solution
    double lambda = 0.0;
    int row_begin = 1;
    int row_end = 1;
};

struct LevelSchedule {
    std::vector<Level> levels;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double u = 0.0;
    bool special_case = false;  // u == 1: bias and variance contours coincide
    bool clamped = false;       // some y exceeded d_out
    double lambda_floor = 0.0;

    int level_count() const { return static_cast<int>(levels.size()); }
};

/// c0 (N / ln N)^{-1/alpha}
double lambda_floor(const ProblemConfig& cfg, double n);

/// Smallest integer >= y, ignoring rounding noise of relative size 1e-9.
int ceil_tolerant(double y);

/// Exponents (e_x, e_y) of the contour x^{e_x} y^{e_y} = C.
struct ContourExponents {
    double ex = 0.0;
    double ey = 0.0;
};

enum class ContourKind { bias, variance };

ContourExponents contour_exponents(ContourKind kind, const ProblemConfig& cfg);

/// y on the contour through level C at abscissa x.
double contour_y(ContourKind kind, const ProblemConfig& cfg, double level, double x);
/// x on the contour through level C at ordinate y.
double contour_x(ContourKind kind, const ProblemConfig& cfg, double level, double y);

/// Number of learned rows ceil(N^{(q / (1 - gamma')) eta2}), clamped to d_out.
int learned_rows(const ProblemConfig& cfg, double n, bool* clamped = nullptr);

LambdaSchedule variance_lambdas(const ProblemConfig& cfg, double n);
LambdaSchedule bias_lambdas(const ProblemConfig& cfg, double n);

struct ContourPoint {
    double x = 0.0;
    double y = 0.0;
};

/// `samples` log-spaced abscissae over [x_min, x_max] on the given contour.
std::vector<ContourPoint> contour_points(ContourKind kind, double level, const ProblemConfig& cfg,
                                         double x_min, double x_max, int samples);

LevelSchedule multilevel_schedule(const ProblemConfig& cfg, double n);

struct LevelCountBound {
    int levels = 0;
    double bound = 0.0;
};

/// Realized level count and its ceiling: 3 log2 log2 N + 3 when u != 1,
/// 2 log2 N + 3 when u == 1.
LevelCountBound level_count_bound(const ProblemConfig& cfg, double n);

/// Whether u is treated as exactly 1 (relative tolerance 1e-9).
bool is_special_case(double u);

std::string to_string(ContourKind kind);
ContourKind contour_kind_from_string(const std::string& name);

}  // namespace mlkol
