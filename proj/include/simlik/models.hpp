#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "simlik/quadrature.hpp"
#include "simlik/rng.hpp"

namespace simlik {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kEulerGamma = 0.5772156649015328606065120900824024;

/// Joint parameter: theta (model part) and phi (variational part, possibly empty).
struct Xi {
    Vec theta;
    Vec phi;
};

/// Per-coordinate compact box.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& v, double slack = 0.0) const {
        if (v.size() != lo.size()) return false;
        return (v.array() >= lo.array() - slack).all() && (v.array() <= hi.array() + slack).all();
    }
    Vec clamp(Vec v) const {
        return v.cwiseMax(lo).cwiseMin(hi);
    }
    static Box cube(int d, double a, double b);
};

/// Ordered observations x_1..x_n, one per row.
struct Dataset {
    Mat x;

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
    Vec row(int i) const { return x.row(i).transpose(); }

    /// Whitespace-separated numeric text, one observation per line.
    static Dataset load(const std::string& path);
    void save(const std::string& path) const;
};

/// Model-specific analytic facts used as test oracles.
struct OracleBundle {
    /// Gumbel model: E[z] under the heterogeneity law (Euler's gamma).
    double latent_mean = std::numeric_limits<double>::quiet_NaN();
    /// Gumbel model: ELBO maximizer at k=1, mean(x) - gamma.
    std::function<double(const Dataset&)> elbo_k1_maximizer;
    /// Gaussian-linear: posterior mean (theta + x)/2.
    std::function<Vec(const Vec& theta, const Vec& x)> posterior_mean;
    /// Gaussian-linear: variance-optimal variational mean parameters.
    Vec a_star, b_star;  // a* = 1/2, b* = theta*/2 (b_star given theta* = truth field)
    /// Gaussian-linear: closed-form relative variance V_xi(x).
    std::function<double(const Xi&, const Vec& x)> relative_variance;
};

/// Latent-variable model interface: log densities, samplers and the
/// reparameterization map z = g_phi(x, eps) with parameter-free noise eps.
class LatentModel {
  public:
    virtual ~LatentModel() = default;

    virtual std::string name() const = 0;
    virtual int theta_dim() const = 0;
    virtual int phi_dim() const = 0;
    virtual int x_dim() const = 0;
    virtual int z_dim() const = 0;
    virtual Box theta_box() const = 0;
    virtual Box phi_box() const = 0;

    virtual double log_prior(const Xi& xi, const Vec& z) const = 0;
    virtual double log_conditional(const Xi& xi, const Vec& x, const Vec& z) const = 0;
    double log_joint(const Xi& xi, const Vec& x, const Vec& z) const;

    virtual double log_proposal(const Xi& xi, const Vec& x, const Vec& z) const = 0;

    /// Noise law nu of the reparameterization trick.
    virtual Vec draw_noise(Substream& g) const = 0;
    virtual double log_noise_density(const Vec& eps) const = 0;
    virtual Vec reparam_draw(const Xi& xi, const Vec& x, const Vec& eps) const = 0;
    /// log |det d(eps) g_phi(x, eps)|.
    virtual double reparam_log_jacobian(const Xi& xi, const Vec& x, const Vec& eps) const = 0;

    Vec draw_proposal(const Xi& xi, const Vec& x, Substream& g) const;

    /// log importance ratios log p(x, g_phi(x, eps))/q(g_phi(x, eps)|x) for a
    /// block of noise draws (one row each). The default loops over the
    /// virtual densities; models override with a vectorized closed form.
    virtual Eigen::ArrayXd log_ratio_block(const Xi& xi, const Vec& x, const Mat& noise) const;

    virtual bool has_exact_log_marginal() const { return true; }
    virtual double exact_log_marginal(const Xi& xi, const Vec& x) const = 0;

    /// Simulate one observation from the model at theta (latent integrated out).
    virtual Vec simulate_observation(const Vec& theta, Substream& g) const = 0;

    virtual OracleBundle oracle_reference() const = 0;

    /// Default variational parameter (empty phi for fixed-simulator models).
    virtual Vec default_phi() const { return Vec(0); }

    Xi make_xi(const Vec& theta) const;
    void check_dims(const Xi& xi, const Vec& x, const Vec& z) const;
};

double log_importance_ratio(const LatentModel& m, const Xi& xi, const Vec& x, const Vec& z);

/// Unobserved-heterogeneity model: x|z ~ N(theta + z, 1), z ~ Gumbel with
/// density q(z) = e^{-z} exp(-e^{-z}); the simulator q is fixed (phi empty).
class GumbelHeterogeneityModel final : public LatentModel {
  public:
    explicit GumbelHeterogeneityModel(Box theta_box = Box::cube(1, -10.0, 10.0),
                                      QuadratureRule rule = {});

    std::string name() const override { return "gumbel"; }
    int theta_dim() const override { return 1; }
    int phi_dim() const override { return 0; }
    int x_dim() const override { return 1; }
    int z_dim() const override { return 1; }
    Box theta_box() const override { return theta_box_; }
    Box phi_box() const override { return Box{Vec(0), Vec(0)}; }

    double log_prior(const Xi& xi, const Vec& z) const override;
    double log_conditional(const Xi& xi, const Vec& x, const Vec& z) const override;
    double log_proposal(const Xi& xi, const Vec& x, const Vec& z) const override;

    Vec draw_noise(Substream& g) const override;
    double log_noise_density(const Vec& eps) const override;
    Vec reparam_draw(const Xi& xi, const Vec& x, const Vec& eps) const override;
    double reparam_log_jacobian(const Xi&, const Vec&, const Vec&) const override { return 0.0; }
    Eigen::ArrayXd log_ratio_block(const Xi& xi, const Vec& x, const Mat& noise) const override;

    double exact_log_marginal(const Xi& xi, const Vec& x) const override;
    Vec simulate_observation(const Vec& theta, Substream& g) const override;
    OracleBundle oracle_reference() const override;

    const QuadratureRule& rule() const { return rule_; }

  private:
    Box theta_box_;
    QuadratureRule rule_;
};

/// Gaussian linear setting: prior z ~ N(theta, I), likelihood x|z ~ N(z, I),
/// proposal q_phi = N(diag(a) x + b, proposal_var * I) with phi = (a, b).
/// proposal_var defaults to 2/3; setting it to 1/2 with (a,b) = (1/2, theta/2)
/// makes q the exact posterior, which several diagnostics rely on.
class GaussianLinearModel final : public LatentModel {
  public:
    explicit GaussianLinearModel(int d = 1, double proposal_var = 2.0 / 3.0,
                                 Box theta_box = {}, Box phi_box = {});

    std::string name() const override { return "gaussian-linear"; }
    int theta_dim() const override { return d_; }
    int phi_dim() const override { return 2 * d_; }
    int x_dim() const override { return d_; }
    int z_dim() const override { return d_; }
    Box theta_box() const override { return theta_box_; }
    Box phi_box() const override { return phi_box_; }

    double log_prior(const Xi& xi, const Vec& z) const override;
    double log_conditional(const Xi& xi, const Vec& x, const Vec& z) const override;
    double log_proposal(const Xi& xi, const Vec& x, const Vec& z) const override;

    Vec draw_noise(Substream& g) const override;
    double log_noise_density(const Vec& eps) const override;
    Vec reparam_draw(const Xi& xi, const Vec& x, const Vec& eps) const override;
    double reparam_log_jacobian(const Xi& xi, const Vec& x, const Vec& eps) const override;
    Eigen::ArrayXd log_ratio_block(const Xi& xi, const Vec& x, const Mat& noise) const override;

    double exact_log_marginal(const Xi& xi, const Vec& x) const override;
    Vec simulate_observation(const Vec& theta, Substream& g) const override;
    OracleBundle oracle_reference() const override;

    Vec default_phi() const override;  // (a, b) = (0, 0)

    double proposal_var() const { return proposal_var_; }
    static Vec posterior_mean(const Vec& theta, const Vec& x) { return 0.5 * (theta + x); }
    /// Closed-form V_xi(x) = E_q[(r-1)^2], r the marginal-normalized ratio.
    double relative_variance_closed(const Xi& xi, const Vec& x) const;

    Vec phi_a(const Xi& xi) const { return xi.phi.head(d_); }
    Vec phi_b(const Xi& xi) const { return xi.phi.tail(d_); }

  private:
    int d_;
    double proposal_var_;
    Box theta_box_, phi_box_;
};

}  // namespace simlik
