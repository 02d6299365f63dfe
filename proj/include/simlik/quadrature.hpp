#pragma once

#include <vector>

namespace simlik {

/// One-dimensional rule for the Gumbel-heterogeneity marginal
///   p_theta(x) = int N(x; theta+z, 1) e^{-z} exp(-e^{-z}) dz
///              = int_0^inf N(x; theta - log u, 1) e^{-u} du   (u = e^{-z}).
struct QuadratureRule {
    enum class Kind { gauss_laguerre, adaptive_subdivision };

    Kind kind = Kind::gauss_laguerre;
    int node_count = 64;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    long max_evals = 4'000'000;  // adaptive refinement budget

    bool valid() const { return node_count >= 2 && abs_tol > 0 && rel_tol > 0; }
};

struct GaussLaguerreTable {
    std::vector<double> nodes;        // roots of L_n
    std::vector<double> log_weights;  // weights include the e^{-u} factor
};

/// Nodes/weights for int_0^inf f(u) e^{-u} du, cached per node count.
const GaussLaguerreTable& gauss_laguerre_table(int node_count);

/// log p_theta(x), stable for |x - theta| <= 40 (everything kept in log space).
double log_marginal_gumbel(double theta, double x, const QuadratureRule& rule);

/// p_theta(x) = exp(log_marginal_gumbel); strictly positive.
double integrate_marginal_gumbel(double theta, double x, const QuadratureRule& rule);

namespace gumbel_integrand {
/// log of the integrand in z-space: log N(x;theta+z,1) + log q(z).
double log_value(double delta, double z);  // delta = x - theta
/// Mode of the integrand (unique; the log-integrand is strictly concave).
double mode(double delta);
}  // namespace gumbel_integrand

}  // namespace simlik
