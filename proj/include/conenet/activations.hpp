#pragma once

// Scalar activation functions and their analytic first derivatives.
//
// Kink conventions (the derivative returned where the function is not
// differentiable):
//   Cone, ParameterizedCone at z = 1  -> 0
//   ReLU at z = 0                     -> 0
//   LeakyReLU at z = 0                -> 0.01
//   SELU, ELU at z = 0                -> right-hand value (lambda, 1)

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "conenet/error.hpp"
#include "conenet/tensor.hpp"

namespace conenet {

/// Tag values are part of the model file format; never renumber.
enum class Kind : std::uint8_t {
    Cone = 0,
    ParabolicCone = 1,
    ParameterizedCone = 2,
    Sigmoid = 3,
    Tanh = 4,
    LiSHT = 5,
    Softplus = 6,
    ReLU = 7,
    LeakyReLU = 8,
    GELU = 9,
    SELU = 10,
    Mish = 11,
    Swish = 12,
    ELU = 13,
    /// Linear output layer feeding the softmax head. Not one of the compared activations.
    Identity = 14,
};

inline constexpr std::size_t kKindCount = 15;

/// The fourteen compared activation functions, in table order.
inline constexpr std::array<Kind, 14> kActivationKinds = {
    Kind::Cone, Kind::ParabolicCone, Kind::ParameterizedCone, Kind::Sigmoid, Kind::Tanh,
    Kind::LiSHT, Kind::Softplus, Kind::ReLU, Kind::LeakyReLU, Kind::GELU,
    Kind::SELU, Kind::Mish, Kind::Swish, Kind::ELU,
};

inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kLeakySlope = 0.01;

namespace detail {

inline constexpr std::array<std::string_view, kKindCount> kKindNames = {
    "cone", "parabolic-cone", "parameterized-cone", "sigmoid", "tanh",
    "lisht", "softplus", "relu", "leaky-relu", "gelu",
    "selu", "mish", "swish", "elu", "identity",
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// ln(1 + e^z), rewritten as z + ln(1 + e^-z) above 30 so it cannot overflow.
inline double softplus(double z) {
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

inline constexpr double kSqrtTwoOverPi = 0.79788456080286535588;

}  // namespace detail

struct Activation {
    Kind kind = Kind::Cone;
    /// Shape exponent, read only by ParameterizedCone.
    double cone_beta = 1.0;

    constexpr Activation() = default;
    constexpr Activation(Kind k, double beta = 1.0) : kind(k), cone_beta(beta) {}  // NOLINT(google-explicit-constructor)

    friend bool operator==(const Activation&, const Activation&) = default;
};

[[nodiscard]] inline bool is_cone_family(Kind kind) noexcept {
    return kind == Kind::Cone || kind == Kind::ParabolicCone || kind == Kind::ParameterizedCone;
}

[[nodiscard]] inline std::string_view kind_name(Kind kind) {
    return detail::kKindNames.at(static_cast<std::size_t>(kind));
}

[[nodiscard]] inline std::string valid_kind_names() {
    std::string out;
    for (std::size_t i = 0; i < detail::kKindNames.size(); ++i) {
        if (i) out += ", ";
        out += detail::kKindNames[i];
    }
    return out;
}

[[nodiscard]] inline std::optional<Kind> try_parse_kind(std::string_view name) {
    for (std::size_t i = 0; i < detail::kKindNames.size(); ++i) {
        if (detail::kKindNames[i] == name) return static_cast<Kind>(i);
    }
    return std::nullopt;
}

/// Throws ValidationError naming the valid kinds.
[[nodiscard]] inline Kind parse_kind(std::string_view name) {
    if (auto k = try_parse_kind(name)) return *k;
    throw ValidationError("unknown activation '" + std::string(name) + "'; valid names: " + valid_kind_names());
}

[[nodiscard]] inline std::optional<Kind> kind_from_tag(std::uint8_t tag) noexcept {
    if (tag >= kKindCount) return std::nullopt;
    return static_cast<Kind>(tag);
}

inline void validate(const Activation& act) {
    if (!(act.cone_beta > 0.0) || !std::isfinite(act.cone_beta)) {
        throw ValidationError("cone_beta must be a positive finite number, got " + std::to_string(act.cone_beta));
    }
}

namespace detail {
inline void require_finite(double z) {
    if (!std::isfinite(z)) throw DomainError("activation input is not finite");
}
}  // namespace detail

/// g(z)
[[nodiscard]] inline double forward(const Activation& act, double z) {
    detail::require_finite(z);
    switch (act.kind) {
        case Kind::Cone:
            return 1.0 - std::abs(z - 1.0);
        case Kind::ParabolicCone:
            return z * (2.0 - z);
        case Kind::ParameterizedCone:
            return 1.0 - std::pow(std::abs(z - 1.0), act.cone_beta);
        case Kind::Sigmoid:
            return detail::sigmoid(z);
        case Kind::Tanh:
            return std::tanh(z);
        case Kind::LiSHT:
            return z * std::tanh(z);
        case Kind::Softplus:
            return detail::softplus(z);
        case Kind::ReLU:
            return z > 0.0 ? z : 0.0;
        case Kind::LeakyReLU:
            return z < 0.0 ? kLeakySlope * z : z;
        case Kind::GELU:
            // The tanh argument is sqrt(2/pi) z + 0.044715 z^3, as tabulated.
            return 0.5 * z * (1.0 + std::tanh(detail::kSqrtTwoOverPi * z + 0.044715 * z * z * z));
        case Kind::SELU:
            return z >= 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
        case Kind::Mish:
            return z * std::tanh(detail::softplus(z));
        case Kind::Swish:
            return z * detail::sigmoid(z);
        case Kind::ELU:
            return z >= 0.0 ? z : std::expm1(z);
        case Kind::Identity:
            return z;
    }
    throw ValidationError("invalid activation tag");
}

/// g'(z), with the kink conventions listed at the top of this header.
[[nodiscard]] inline double derivative(const Activation& act, double z) {
    detail::require_finite(z);
    switch (act.kind) {
        case Kind::Cone:
            if (z < 1.0) return 1.0;
            if (z > 1.0) return -1.0;
            return 0.0;
        case Kind::ParabolicCone:
            return 2.0 - 2.0 * z;
        case Kind::ParameterizedCone: {
            const double d = z - 1.0;
            if (d == 0.0) return 0.0;
            const double mag = act.cone_beta * std::pow(std::abs(d), act.cone_beta - 1.0);
            return d > 0.0 ? -mag : mag;
        }
        case Kind::Sigmoid: {
            const double s = detail::sigmoid(z);
            return s * (1.0 - s);
        }
        case Kind::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Kind::LiSHT: {
            const double t = std::tanh(z);
            return t + z * (1.0 - t * t);
        }
        case Kind::Softplus:
            return detail::sigmoid(z);
        case Kind::ReLU:
            return z > 0.0 ? 1.0 : 0.0;
        case Kind::LeakyReLU:
            return z > 0.0 ? 1.0 : kLeakySlope;
        case Kind::GELU: {
            const double u = detail::kSqrtTwoOverPi * z + 0.044715 * z * z * z;
            const double t = std::tanh(u);
            const double du = detail::kSqrtTwoOverPi + 3.0 * 0.044715 * z * z;
            return 0.5 * (1.0 + t) + 0.5 * z * (1.0 - t * t) * du;
        }
        case Kind::SELU:
            return z >= 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
        case Kind::Mish: {
            const double t = std::tanh(detail::softplus(z));
            return t + z * (1.0 - t * t) * detail::sigmoid(z);
        }
        case Kind::Swish: {
            const double s = detail::sigmoid(z);
            return s + z * s * (1.0 - s);
        }
        case Kind::ELU:
            return z >= 0.0 ? 1.0 : std::exp(z);
        case Kind::Identity:
            return 1.0;
    }
    throw ValidationError("invalid activation tag");
}

/// The open interval on which g > 0 when that set is a bounded interval.
/// Every cone-family member vanishes exactly at 0 and 2 (|z-1|^beta = 1 iff |z-1| = 1).
[[nodiscard]] inline std::optional<std::pair<double, double>> positive_interval(const Activation& act) {
    if (is_cone_family(act.kind)) return std::pair{0.0, 2.0};
    return std::nullopt;
}

[[nodiscard]] inline Matrix forward(const Activation& act, const Matrix& z) {
    return elementwise(z, [&](double v) { return forward(act, v); });
}

[[nodiscard]] inline Matrix derivative(const Activation& act, const Matrix& z) {
    return elementwise(z, [&](double v) { return derivative(act, v); });
}

}  // namespace conenet
