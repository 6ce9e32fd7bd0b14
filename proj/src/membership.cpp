#include "fuzzyduo/membership.hpp"

#include "fuzzyduo/error.hpp"

#include <string>

namespace fuzzyduo {

namespace {

void check_args(double x, double m, double width, const char* width_name)
{
    if (!std::isfinite(x) || !std::isfinite(m))
        throw InvalidParameter("membership: non-finite input or center");
    if (!std::isfinite(width) || !(width > 0.0))
        throw InvalidParameter(std::string("membership: ") + width_name + " must be finite and > 0");
}

} // namespace

std::string_view to_string(MfFamily family)
{
    switch (family) {
    case MfFamily::ModifiedLaplace:
        return "modified-laplace";
    case MfFamily::Gaussian:
        return "gaussian";
    }
    return "unknown";
}

MfFamily parse_mf_family(std::string_view text)
{
    if (text == "modified-laplace" || text == "ml" || text == "laplace")
        return MfFamily::ModifiedLaplace;
    if (text == "gaussian" || text == "gauss")
        return MfFamily::Gaussian;
    throw InvalidParameter("unknown membership family '" + std::string(text) + "'");
}

double eval_ml(double x, double m, double lambda)
{
    check_args(x, m, lambda, "lambda");
    return std::exp(logmf::ml(x, m, lambda));
}

double eval_gaussian(double x, double m, double sigma)
{
    check_args(x, m, sigma, "sigma");
    return std::exp(logmf::gaussian(x, m, sigma));
}

double d_ml_d_lambda(double x, double m, double lambda)
{
    return logmf::d_ml_d_lambda(x, m) * eval_ml(x, m, lambda);
}

double d_gauss_d_sigma(double x, double m, double sigma)
{
    return eval_gaussian(x, m, sigma) * logmf::d_gauss_d_sigma(x, m, sigma);
}

double d_ml_d_center(double x, double m, double lambda)
{
    return logmf::d_ml_d_center(x, m, lambda) * eval_ml(x, m, lambda);
}

double d_gauss_d_center(double x, double m, double sigma)
{
    return eval_gaussian(x, m, sigma) * logmf::d_gauss_d_center(x, m, sigma);
}

double MfParams::eval(double x) const
{
    return family == MfFamily::ModifiedLaplace ? eval_ml(x, center, width()) : eval_gaussian(x, center, width());
}

double MfParams::log_eval(double x) const
{
    return family == MfFamily::ModifiedLaplace ? logmf::ml(x, center, width()) : logmf::gaussian(x, center, width());
}

} // namespace fuzzyduo
