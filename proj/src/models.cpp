#include "simlik/models.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "simlik/errors.hpp"

namespace simlik {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056;

double log_normal_density(double v, double var) {
    return -0.5 * (kLog2Pi + std::log(var) + v * v / var);
}

double log_gumbel_density(double z) {
    return -z - std::exp(-z);
}

}  // namespace

Box Box::cube(int d, double a, double b) {
    Box box;
    box.lo = Vec::Constant(d, a);
    box.hi = Vec::Constant(d, b);
    return box;
}

Dataset Dataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged dataset file: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyDataset("dataset file has no observations: " + path);
    Dataset d;
    d.x.resize(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < d.n(); ++i)
        for (int j = 0; j < d.dim(); ++j) d.x(i, j) = rows[i][j];
    return d;
}

void Dataset::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out.precision(17);
    for (int i = 0; i < n(); ++i) {
        for (int j = 0; j < dim(); ++j) out << (j ? " " : "") << x(i, j);
        out << '\n';
    }
}

void LatentModel::check_dims(const Xi& xi, const Vec& x, const Vec& z) const {
    if (xi.theta.size() != theta_dim() || xi.phi.size() != phi_dim())
        throw DimensionMismatch(name() + ": parameter dimension mismatch");
    if (x.size() != x_dim() || z.size() != z_dim())
        throw DimensionMismatch(name() + ": observation/latent dimension mismatch");
}

double LatentModel::log_joint(const Xi& xi, const Vec& x, const Vec& z) const {
    check_dims(xi, x, z);
    return log_prior(xi, z) + log_conditional(xi, x, z);
}

Vec LatentModel::draw_proposal(const Xi& xi, const Vec& x, Substream& g) const {
    return reparam_draw(xi, x, draw_noise(g));
}

Xi LatentModel::make_xi(const Vec& theta) const {
    return Xi{theta, default_phi()};
}

double log_importance_ratio(const LatentModel& m, const Xi& xi, const Vec& x, const Vec& z) {
    return m.log_joint(xi, x, z) - m.log_proposal(xi, x, z);
}

Eigen::ArrayXd LatentModel::log_ratio_block(const Xi& xi, const Vec& x, const Mat& noise) const {
    Eigen::ArrayXd out(noise.rows());
    for (int l = 0; l < noise.rows(); ++l) {
        const Vec z = reparam_draw(xi, x, noise.row(l).transpose());
        out[l] = log_joint(xi, x, z) - log_proposal(xi, x, z);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gumbel heterogeneity model

GumbelHeterogeneityModel::GumbelHeterogeneityModel(Box theta_box, QuadratureRule rule)
    : theta_box_(std::move(theta_box)), rule_(rule) {}

double GumbelHeterogeneityModel::log_prior(const Xi&, const Vec& z) const {
    return log_gumbel_density(z[0]);
}

double GumbelHeterogeneityModel::log_conditional(const Xi& xi, const Vec& x, const Vec& z) const {
    return log_normal_density(x[0] - xi.theta[0] - z[0], 1.0);
}

double GumbelHeterogeneityModel::log_proposal(const Xi& xi, const Vec& x, const Vec& z) const {
    check_dims(xi, x, z);
    return log_gumbel_density(z[0]);  // fixed simulator, independent of (x, phi)
}

Vec GumbelHeterogeneityModel::draw_noise(Substream& g) const {
    Vec eps(1);
    eps[0] = g.next_gumbel();
    return eps;
}

double GumbelHeterogeneityModel::log_noise_density(const Vec& eps) const {
    return log_gumbel_density(eps[0]);
}

Vec GumbelHeterogeneityModel::reparam_draw(const Xi& xi, const Vec& x, const Vec& eps) const {
    check_dims(xi, x, eps);
    return eps;  // g(x, eps) = eps
}

Eigen::ArrayXd GumbelHeterogeneityModel::log_ratio_block(const Xi& xi, const Vec& x,
                                                         const Mat& noise) const {
    check_dims(xi, x, noise.row(0).transpose());
    const double d = x[0] - xi.theta[0];
    return -0.5 * (d - noise.col(0).array()).square() - kLogSqrt2Pi;
}

double GumbelHeterogeneityModel::exact_log_marginal(const Xi& xi, const Vec& x) const {
    if (xi.theta.size() != theta_dim() || x.size() != x_dim())
        throw DimensionMismatch("gumbel: parameter/observation dimension mismatch");
    return log_marginal_gumbel(xi.theta[0], x[0], rule_);
}

Vec GumbelHeterogeneityModel::simulate_observation(const Vec& theta, Substream& g) const {
    Vec x(1);
    const double z = g.next_gumbel();
    x[0] = theta[0] + z + g.next_normal();
    return x;
}

OracleBundle GumbelHeterogeneityModel::oracle_reference() const {
    OracleBundle b;
    b.latent_mean = kEulerGamma;
    b.elbo_k1_maximizer = [](const Dataset& d) {
        if (d.n() == 0) throw EmptyDataset("elbo_k1_maximizer: empty dataset");
        return d.x.col(0).mean() - kEulerGamma;
    };
    return b;
}

// ---------------------------------------------------------------------------
// Gaussian linear model

GaussianLinearModel::GaussianLinearModel(int d, double proposal_var, Box theta_box, Box phi_box)
    : d_(d), proposal_var_(proposal_var) {
    theta_box_ = theta_box.dim() == d ? theta_box : Box::cube(d, -10.0, 10.0);
    phi_box_ = phi_box.dim() == 2 * d ? phi_box : Box::cube(2 * d, -5.0, 5.0);
}

double GaussianLinearModel::log_prior(const Xi& xi, const Vec& z) const {
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += log_normal_density(z[j] - xi.theta[j], 1.0);
    return s;
}

double GaussianLinearModel::log_conditional(const Xi&, const Vec& x, const Vec& z) const {
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += log_normal_density(x[j] - z[j], 1.0);
    return s;
}

double GaussianLinearModel::log_proposal(const Xi& xi, const Vec& x, const Vec& z) const {
    check_dims(xi, x, z);
    const Vec m = phi_a(xi).cwiseProduct(x) + phi_b(xi);
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += log_normal_density(z[j] - m[j], proposal_var_);
    return s;
}

Vec GaussianLinearModel::draw_noise(Substream& g) const {
    Vec eps(d_);
    for (int j = 0; j < d_; ++j) eps[j] = g.next_normal();
    return eps;
}

double GaussianLinearModel::log_noise_density(const Vec& eps) const {
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += log_normal_density(eps[j], 1.0);
    return s;
}

Vec GaussianLinearModel::reparam_draw(const Xi& xi, const Vec& x, const Vec& eps) const {
    check_dims(xi, x, eps);
    return phi_a(xi).cwiseProduct(x) + phi_b(xi) + std::sqrt(proposal_var_) * eps;
}

double GaussianLinearModel::reparam_log_jacobian(const Xi&, const Vec&, const Vec&) const {
    return 0.5 * d_ * std::log(proposal_var_);
}

double GaussianLinearModel::exact_log_marginal(const Xi& xi, const Vec& x) const {
    if (xi.theta.size() != theta_dim() || x.size() != x_dim())
        throw DimensionMismatch("gaussian-linear: parameter/observation dimension mismatch");
    double s = 0.0;
    for (int j = 0; j < d_; ++j) s += log_normal_density(x[j] - xi.theta[j], 2.0);
    return s;  // convolution of two unit-variance Gaussians
}

Vec GaussianLinearModel::simulate_observation(const Vec& theta, Substream& g) const {
    Vec x(d_);
    for (int j = 0; j < d_; ++j) x[j] = theta[j] + g.next_normal() + g.next_normal();
    return x;
}

Vec GaussianLinearModel::default_phi() const {
    return Vec::Zero(2 * d_);
}

double GaussianLinearModel::relative_variance_closed(const Xi& xi, const Vec& x) const {
    // E_q[r^2] with r = p(z|x)/q(z|x); per dimension
    //   int N(z; m1, s1)^2 / N(z; m2, s2) dz
    // with m1 = (theta + x)/2, s1 = 1/2, m2 = a x + b, s2 = proposal_var.
    // Completing the square: E = sqrt(s2 / (s1^2 A)) * exp(B^2/(2A) + C),
    // A = 2/s1 - 1/s2, B = 2 m1/s1 - m2/s2, C = -m1^2/s1 + m2^2/(2 s2),
    // finite only when s2 > s1/2.
    const double s1 = 0.5, s2 = proposal_var_;
    const double A = 2.0 / s1 - 1.0 / s2;
    if (A <= 0.0) return std::numeric_limits<double>::infinity();
    const Vec m1 = posterior_mean(xi.theta, x);
    const Vec m2 = phi_a(xi).cwiseProduct(x) + phi_b(xi);
    double log_e2 = 0.0;
    for (int j = 0; j < d_; ++j) {
        const double B = 2.0 * m1[j] / s1 - m2[j] / s2;
        const double C = -m1[j] * m1[j] / s1 + m2[j] * m2[j] / (2.0 * s2);
        log_e2 += 0.5 * (std::log(s2) - 2.0 * std::log(s1) - std::log(A)) + B * B / (2.0 * A) + C;
    }
    return std::exp(log_e2) - 1.0;
}

Eigen::ArrayXd GaussianLinearModel::log_ratio_block(const Xi& xi, const Vec& x,
                                                    const Mat& noise) const {
    check_dims(xi, x, noise.row(0).transpose());
    const double s2 = proposal_var_;
    const Vec m = phi_a(xi).cwiseProduct(x) + phi_b(xi);
    Mat z = std::sqrt(s2) * noise;
    z.rowwise() += m.transpose();
    // log p(z, x) - log q(z | x); the proposal quadratic reduces to |eps|^2/2.
    return -0.5 * ((z.rowwise() - xi.theta.transpose()).rowwise().squaredNorm().array() +
                   (z.rowwise() - x.transpose()).rowwise().squaredNorm().array()) -
           d_ * kLog2Pi + 0.5 * d_ * std::log(2.0 * M_PI * s2) +
           0.5 * noise.array().square().rowwise().sum();
}

OracleBundle GaussianLinearModel::oracle_reference() const {
    OracleBundle b;
    b.posterior_mean = [](const Vec& theta, const Vec& x) { return posterior_mean(theta, x); };
    b.a_star = Vec::Constant(d_, 0.5);
    b.b_star = Vec::Constant(d_, 0.5);  // scale by theta*: b* = theta*/2 per coordinate
    b.relative_variance = [this](const Xi& xi, const Vec& x) {
        return relative_variance_closed(xi, x);
    };
    return b;
}

}  // namespace simlik
