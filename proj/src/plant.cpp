#include "inesc/plant.hpp"

namespace inesc {

Vector plant_derivative(const Vector& x_i, const Matrix& B_i, const Vector& u_i) {
  require_dim(B_i.rows(), x_i.size(), "B_i rows vs state");
  require_dim(B_i.cols(), u_i.size(), "B_i cols vs input");
  return B_i * u_i - x_i;
}

Vector steady_state(const Matrix& B, const Vector& u) {
  require_dim(B.cols(), u.size(), "B cols vs input");
  return B * u;
}

}  // namespace inesc
