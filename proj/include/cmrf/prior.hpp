#pragma once

#include <Eigen/Core>
#include <string>

#include "cmrf/lattice.hpp"

namespace cmrf {

enum class PriorVariant {
  cauchy_diff1_1d,
  cauchy_diff2_1d,
  cauchy_iso1_2d,
  cauchy_aniso1_2d,
  cauchy_iso2_2d,
  cauchy_aniso2_2d,
  cauchy_sheet,
  cauchy_spde,
  cauchy_laplace_only,
  gauss_diff1,
  gauss_diff2,
  gauss_spde,
  tv1,
  tv2,
};

const char* to_string(PriorVariant v);
PriorVariant prior_variant_from_string(const std::string& name);
bool is_second_order(PriorVariant v);
bool is_spde_family(PriorVariant v);

/// Prior family selector plus every scalar parameter any variant reads.
/// A variant touches only its own parameters; the rest are ignored.
struct PriorSpec {
  PriorVariant variant = PriorVariant::cauchy_diff1_1d;

  double lambda = 1.0;       // increment scale of the Cauchy terms
  double gamma = 1.0;        // boundary scale
  double gamma_prime = 1.0;  // second boundary scale (second-order variants)
  double ell = 0.01;         // SPDE length parameter
  double xi = 1.0;           // SPDE Cauchy noise scale
  double sigma0 = 1.0;       // Gaussian boundary std-dev
  double sigma1 = 1.0;       // Gaussian first-difference std-dev
  double sigma2 = 1.0;       // Gaussian second-difference std-dev
  double sigma_w = 1.0;      // Gaussian SPDE noise std-dev
  double zeta = 1.0;         // TV interior rate
  double zeta_prime = 1.0;   // TV boundary rate
  double psi = 1.0;          // TV second-order boundary rate
  double delta = 3.1622776601683794e-3;  // Charbonnier smoothing, delta^2 = 1e-5
  double h_spde = 0.0;       // SPDE stencil spacing; 0 = lattice spacing

  bool operator==(const PriorSpec&) const = default;
};

/// Throws std::invalid_argument if the parameters or the lattice
/// dimensionality do not fit the selected variant.
void validate_prior(const PriorSpec& spec, const Lattice& lat);

struct PriorLogParts {
  double interior = 0.0;  // increment / stencil product terms
  double boundary = 0.0;  // boundary factor terms
  double total() const { return interior + boundary; }
};

/// Unnormalized log prior density (normalization constants dropped).
double log_prior(const PriorSpec& spec, const Field& u);

/// Same value split into interior and boundary contributions.
PriorLogParts log_prior_parts(const PriorSpec& spec, const Field& u);

/// Exact analytic gradient of log_prior with respect to every node value.
Field grad_log_prior(const PriorSpec& spec, const Field& u);
void grad_log_prior(const PriorSpec& spec, const Field& u, Eigen::VectorXd& grad);

/// log pi(u with u[site] = new_value) - log pi(u), recomputing only the
/// terms whose stencil touches the site.
double delta_log_prior(const PriorSpec& spec, const Field& u, int site, double new_value);

// Family-restricted entry points; each throws on a variant outside its family.
double log_prior_1d(const PriorSpec& spec, const Field& u);
double log_prior_2d_difference(const PriorSpec& spec, const Field& u);
double log_prior_spde(const PriorSpec& spec, const Field& u);
double log_prior_comparison(const PriorSpec& spec, const Field& u);

/// Stencil spacing the SPDE variants actually use for this lattice.
double resolved_spde_spacing(const PriorSpec& spec, const Lattice& lat);

}  // namespace cmrf
