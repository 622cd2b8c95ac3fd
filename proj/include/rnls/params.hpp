#ifndef RNLS_PARAMS_HPP
#define RNLS_PARAMS_HPP

#include <stdexcept>
#include <string>

namespace rnls {

// Dimensionless couplings of the two-component system. gamma must be positive.
struct CouplingParams {
    double kappa = 0.0;
    double gamma = 1.0;

    void validate() const {
        if (!(gamma > 0.0))
            throw std::invalid_argument("CouplingParams: gamma must be > 0, got " +
                                        std::to_string(gamma));
    }
};

enum class JRegion { J0, J1, J2, J3 };
enum class KRegion { K1, K2, K3 };

enum class BranchKind { plus_minus, minus_plus, degenerate, semitrivial };

// One solution (alpha, beta) of the line/ellipse system, with residuals
// against both defining equations.
struct BranchPoint {
    double alpha = 0.0;
    double beta = 0.0;
    BranchKind kind = BranchKind::semitrivial;
    double residual_line = 0.0;     // kappa*alpha + gamma*beta - 1
    double residual_ellipse = 0.0;  // gamma*alpha^2 + 2*beta^2 - 2*beta
};

inline const char* to_string(JRegion r) {
    switch (r) {
        case JRegion::J0: return "J0";
        case JRegion::J1: return "J1";
        case JRegion::J2: return "J2";
        case JRegion::J3: return "J3";
    }
    return "?";
}

inline const char* to_string(KRegion r) {
    switch (r) {
        case KRegion::K1: return "K1";
        case KRegion::K2: return "K2";
        case KRegion::K3: return "K3";
    }
    return "?";
}

inline const char* to_string(BranchKind k) {
    switch (k) {
        case BranchKind::plus_minus: return "plus_minus";
        case BranchKind::minus_plus: return "minus_plus";
        case BranchKind::degenerate: return "degenerate";
        case BranchKind::semitrivial: return "semitrivial";
    }
    return "?";
}

}  // namespace rnls

#endif
