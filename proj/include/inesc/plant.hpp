#pragma once

// Agent subsystems x_i' = -x_i + B_i u_i. The state matrix is fixed at -I.

#include "inesc/types.hpp"

namespace inesc {

// Returns -x_i + B_i u_i.
Vector plant_derivative(const Vector& x_i, const Matrix& B_i, const Vector& u_i);

// Steady-state map pi(u) = B u for the stacked system.
Vector steady_state(const Matrix& B, const Vector& u);

}  // namespace inesc
