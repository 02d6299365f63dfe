#include <simlik/asymptotics.hpp>

#include <cmath>

#include <Eigen/Dense>

#include <simlik/errors.hpp>

namespace simlik {
namespace {

Vec fd_steps(const Vec& theta, double fd_step) {
    if (fd_step > 0.0) return Vec::Constant(theta.size(), fd_step);
    return (1e-5 * theta.array().abs().max(1.0)).matrix();
}

double eval(const LatentModel& model, const Vec& theta, const Vec& x) {
    return model.exact_log_marginal(model.make_xi(theta), x);
}

}  // namespace

std::pair<Vec, Mat> score_and_hessian(const LatentModel& model, const Vec& theta,
                                      const Vec& x, double fd_step) {
    const int d = model.theta_dim();
    if (theta.size() != d) throw DimensionMismatch("score_and_hessian: theta size");
    const Vec h = fd_steps(theta, fd_step);
    const Box box = model.theta_box();
    if (!box.contains(theta - 2.0 * h) || !box.contains(theta + 2.0 * h))
        throw BoundaryTooClose("score_and_hessian: theta within 2 fd steps of the box");

    const double f0 = eval(model, theta, x);
    Vec score(d);
    Mat hess(d, d);
    std::vector<double> fp(d), fm(d);
    for (int j = 0; j < d; ++j) {
        Vec tp = theta, tm = theta;
        tp[j] += h[j];
        tm[j] -= h[j];
        fp[j] = eval(model, tp, x);
        fm[j] = eval(model, tm, x);
        score[j] = (fp[j] - fm[j]) / (2.0 * h[j]);
        hess(j, j) = (fp[j] - 2.0 * f0 + fm[j]) / (h[j] * h[j]);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Vec tpp = theta, tpm = theta, tmp = theta, tmm = theta;
            tpp[i] += h[i]; tpp[j] += h[j];
            tpm[i] += h[i]; tpm[j] -= h[j];
            tmp[i] -= h[i]; tmp[j] += h[j];
            tmm[i] -= h[i]; tmm[j] -= h[j];
            const double v = (eval(model, tpp, x) - eval(model, tpm, x) -
                              eval(model, tmp, x) + eval(model, tmm, x)) /
                             (4.0 * h[i] * h[j]);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    return {score, hess};
}

SandwichEstimate sandwich(const LatentModel& model, const Vec& theta_hat,
                          const Dataset& data, double fd_step, double condition_cap) {
    const int d = model.theta_dim();
    const int n = data.n();
    SandwichEstimate out;
    out.n = n;
    out.j1_hat = Mat::Zero(d, d);
    out.j2_hat = Mat::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        const auto [s, hh] = score_and_hessian(model, theta_hat, data.row(i), fd_step);
        out.j1_hat += s * s.transpose();
        out.j2_hat += hh;
    }
    out.j1_hat /= n;
    out.j2_hat /= n;

    Eigen::JacobiSVD<Mat> svd(out.j2_hat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues().maxCoeff();
    const double smin = svd.singularValues().minCoeff();
    out.condition_number_j2 =
        smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition_number_j2 < condition_cap))
        throw SingularJ2("sandwich: j2 condition number " +
                         std::to_string(out.condition_number_j2));

    const Mat j2_inv = out.j2_hat.inverse();
    const Mat cov = j2_inv * out.j1_hat * j2_inv.transpose();
    out.cov_hat = 0.5 * (cov + cov.transpose());
    return out;
}

std::vector<Interval> confidence_interval(const Vec& theta_hat,
                                          const SandwichEstimate& sw, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence_interval: level outside (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    std::vector<Interval> out;
    out.reserve(theta_hat.size());
    for (int j = 0; j < theta_hat.size(); ++j) {
        const double v = std::max(0.0, sw.cov_hat(j, j));
        const double hw = z * std::sqrt(v / sw.n);
        out.push_back({theta_hat[j] - hw, theta_hat[j] + hw});
    }
    return out;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation, then one Halley step off erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace simlik
