#pragma once

#include "colact/common.hpp"
#include "colact/discrete.hpp"

namespace colact {

/// Surrogate-distribution quantities for the algorithm-bias bound.
struct SurrogateStats {
    double omega = 0.0;    // classifier TV distance, in [0, 1)
    double xi_q = 0.0;     // signal uniqueness under the surrogate
    double delta_q = 0.0;  // sub-optimality gap under the surrogate
};

/// First-stage error rates driving the two-stage effective size.
struct JttStats {
    double lambda_up = 1.0;    // upweight factor, >= 1
    double p_e = 0.0;          // P[f(X) != Y] under the mixture
    double p_e_given_c = 0.0;  // same, conditioned on collective membership
};

struct UncertaintyBall {
    double radius_delta = 0.0;
    Divergence divergence_kind = Divergence::kl;
};

/// Success lower bound S(alpha) >= 1 - ((1-a)/a) * delta * xi - e/(1-e).
/// Returned raw; may be negative. Callers clamp for display only.
template <class R>
R success_lower_bound(const R& alpha, const R& xi, const R& delta, const R& epsilon) {
    if (alpha <= scalar_traits<R>::zero() || alpha > scalar_traits<R>::one())
        throw DomainError("bound undefined: alpha outside (0, 1]");
    if (epsilon < scalar_traits<R>::zero() || epsilon >= scalar_traits<R>::one())
        throw DomainError("bound undefined: epsilon outside [0, 1)");
    const R one = scalar_traits<R>::one();
    return one - (one - alpha) / alpha * delta * xi - epsilon / (one - epsilon);
}

inline double thm1_bound(const SignalStats& stats) {
    return success_lower_bound(stats.alpha, stats.xi, stats.delta, stats.epsilon);
}

/// Effective-size variant: S >= 1 - ((1-ae)/ae)(delta*xi + c) - e/(1-e),
/// with stats.alpha carrying alpha_eff.
inline double corrected_bound(const SignalStats& stats, double c) {
    if (stats.alpha <= 0.0 || stats.alpha > 1.0)
        throw DomainError("bound undefined: alpha_eff outside (0, 1]");
    if (stats.epsilon < 0.0 || stats.epsilon >= 1.0)
        throw DomainError("bound undefined: epsilon outside [0, 1)");
    return 1.0 - (1.0 - stats.alpha) / stats.alpha * (stats.delta * stats.xi + c) -
           stats.epsilon / (1.0 - stats.epsilon);
}

/// Single-surrogate evaluation of the algorithm-bias bound:
/// S(alpha) >= 1 - w/(1-w) - ((1-a)/a) * xi_Q * delta_Q.
/// The sup over surrogates is taken by the caller over a candidate list.
template <class R>
R oblivious_bound_value(const R& alpha, const R& omega, const R& xi_q, const R& delta_q) {
    if (alpha <= scalar_traits<R>::zero() || alpha > scalar_traits<R>::one())
        throw DomainError("bound undefined: alpha outside (0, 1]");
    if (omega < scalar_traits<R>::zero() || omega >= scalar_traits<R>::one())
        throw DomainError("bound undefined: omega outside [0, 1)");
    const R one = scalar_traits<R>::one();
    return one - omega / (one - omega) - (one - alpha) / alpha * xi_q * delta_q;
}

inline double oblivious_bound(double alpha, const SurrogateStats& surrogate) {
    return oblivious_bound_value(alpha, surrogate.omega, surrogate.xi_q, surrogate.delta_q);
}

/// alpha_eff = alpha + delta / D_f(P* || P_alpha), clamped to <= 1.
inline double dro_effective_size(double alpha, const UncertaintyBall& ball,
                                 double div_pstar_palpha) {
    if (alpha < 0.0 || alpha > 1.0) throw DomainError("dro_effective_size: alpha outside [0, 1]");
    if (ball.radius_delta < 0.0) throw DomainError("dro_effective_size: negative radius");
    if (div_pstar_palpha <= 0.0)
        throw DomainError("dro_effective_size: divergence must be positive");
    double eff = alpha + ball.radius_delta / div_pstar_palpha;
    return eff > 1.0 ? 1.0 : eff;
}

/// alpha_eff = alpha * (l*P_{E|C} + (1-P_{E|C})) / (l*P_E + (1-P_E)).
inline double jtt_effective_size(double alpha, const JttStats& stats) {
    const double denom = stats.lambda_up * stats.p_e + (1.0 - stats.p_e);
    if (denom <= 0.0) throw DomainError("jtt_effective_size: nonpositive denominator");
    return alpha * (stats.lambda_up * stats.p_e_given_c + (1.0 - stats.p_e_given_c)) / denom;
}

/// Validation-control bound:
/// S_f - S_h >= (P_V[f(X)=Y] - P_V[h(X)=Y]) / (beta - alpha).
inline double validation_gap_bound(double acc_f, double acc_h, double beta, double alpha) {
    if (beta <= alpha) throw DomainError("validation_gap_bound requires beta > alpha");
    return (acc_f - acc_h) / (beta - alpha);
}

/// The ball member the effective-size proposition constructs:
/// lambda * P* + (1 - lambda) * P_alpha with
/// lambda = min(1, delta / ((1-alpha) * D_f(P* || P0))).
inline DiscreteJoint<double> dro_ball_member(const DiscreteJoint<double>& base,
                                             const DiscreteJoint<double>& collective,
                                             double alpha, const UncertaintyBall& ball) {
    const double div = f_divergence(collective, base, ball.divergence_kind);
    if (div <= 0.0) throw DomainError("dro_ball_member: divergence must be positive");
    double lambda = ball.radius_delta / ((1.0 - alpha) * div);
    if (lambda > 1.0) lambda = 1.0;
    const DiscreteJoint<double> mix = mixture(base, collective, alpha);
    return mixture(mix, collective, lambda);
}

}  // namespace colact
