#pragma once

#include <cmath>
#include <string_view>

namespace fuzzyduo {

enum class MfFamily { ModifiedLaplace, Gaussian };

std::string_view to_string(MfFamily family);
// Accepts "modified-laplace"/"ml" and "gaussian"; throws InvalidParameter otherwise.
MfFamily parse_mf_family(std::string_view text);

/// Modified-Laplace membership exp(-lambda * |x - m|), in (0, 1].
double eval_ml(double x, double m, double lambda);

/// Gaussian membership exp(-(x - m)^2 / (2 sigma^2)), peak value 1.
double eval_gaussian(double x, double m, double sigma);

/// d/d lambda of eval_ml: -|x - m| * exp(-lambda |x - m|). Never positive.
double d_ml_d_lambda(double x, double m, double lambda);

/// d/d sigma of eval_gaussian: mu * (x - m)^2 / sigma^3. Never negative.
double d_gauss_d_sigma(double x, double m, double sigma);

/// d/d m of eval_ml: lambda * sign(x - m) * mu, with 0 at the kink x == m.
double d_ml_d_center(double x, double m, double lambda);

/// d/d m of eval_gaussian: mu * (x - m) / sigma^2.
double d_gauss_d_center(double x, double m, double sigma);

// Log-domain forms. Composition (firing strengths, training) works with
// log(mu) so products over many features never underflow. Each d_log_* is the
// matching derivative above divided by mu.
namespace logmf {

inline double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline double ml(double x, double m, double lambda) { return -lambda * std::abs(x - m); }
inline double gaussian(double x, double m, double sigma)
{
    const double z = (x - m) / sigma;
    return -0.5 * z * z;
}

inline double d_ml_d_lambda(double x, double m) { return -std::abs(x - m); }
inline double d_ml_d_center(double x, double m, double lambda) { return lambda * sign_or_zero(x - m); }
inline double d_gauss_d_sigma(double x, double m, double sigma)
{
    const double diff = x - m;
    return diff * diff / (sigma * sigma * sigma);
}
inline double d_gauss_d_center(double x, double m, double sigma) { return (x - m) / (sigma * sigma); }

} // namespace logmf

/// One membership function with its width stored unconstrained: the effective
/// width (lambda or sigma) is exp(width_raw), so it stays positive under any
/// gradient update.
struct MfParams {
    double center = 0.0;
    double width_raw = 0.0;
    MfFamily family = MfFamily::ModifiedLaplace;

    double width() const { return std::exp(width_raw); }
    double eval(double x) const;
    double log_eval(double x) const;
};

} // namespace fuzzyduo
