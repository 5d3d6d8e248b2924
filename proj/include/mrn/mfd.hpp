#pragma once

#include <string>
#include <vector>

namespace mrn {

// Production-form outflow curve G(N) = a*N^3 + b*N^2 + c*N in vehicles/second,
// valid for accumulations N in [0, n_jam].
struct MfdPolynomial {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double n_jam = 0.0;
};

// G(N), clamped below at zero. Throws DomainError outside [0, n_jam].
double mfd_outflow(const MfdPolynomial& mfd, double n);

// dG/dN, no clamping.
double mfd_derivative(const MfdPolynomial& mfd, double n);

// Accumulation maximizing G on [0, n_jam] (analytic stationary points).
double critical_accumulation(const MfdPolynomial& mfd);

double max_outflow(const MfdPolynomial& mfd);

// Rejects curves that are not a single-peaked nonnegative outflow law on
// [0, n_jam]. `label` names the region in diagnostics.
void validate_mfd(const MfdPolynomial& mfd, const std::string& label);

// Largest accumulation where the concave envelope of G still touches the
// curve. Beyond it the envelope is the straight segment to (n_jam, G(n_jam));
// for curves concave on the whole domain this equals n_jam.
double envelope_tangency_bound(const MfdPolynomial& mfd);

// Concave min-of-lines upper approximation of G.
struct PwaMfd {
    std::vector<double> slopes;     // one entry per line
    std::vector<double> intercepts; // value = slope*N + intercept
    double n_jam = 0.0;
};

// min over lines at accumulation n. Throws DomainError outside [0, n_jam].
double pwa_eval(const PwaMfd& pwa, double n);

// Builds l_count tangent lines to the concave envelope of G. Abscissae are
// spaced so the relative over-approximation is balanced across segments
// (equal spacing concentrates error near N = 0 where G is small); the last
// line is the envelope segment covering (tangency bound, n_jam]. The result
// satisfies pwa_eval >= G everywhere on [0, n_jam].
PwaMfd pwa_approximate(const MfdPolynomial& mfd, int l_count);

} // namespace mrn
