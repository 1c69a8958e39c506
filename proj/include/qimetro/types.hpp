#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qimetro {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using MatrixXc = CMatrix<double>;
using VectorXc = CVector<double>;

// Bad arguments, violated preconditions.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: non-convergence, truncation, invalid intermediate states.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Highest Fock occupation kept per mode. The per-mode basis has n_max + 1 states.
class Cutoff {
public:
  explicit Cutoff(int n_max) : n_max_(n_max) {
    if (n_max < 1) throw PreconditionError("Cutoff: n_max must be >= 1, got " + std::to_string(n_max));
  }

  int n_max() const { return n_max_; }
  int dim() const { return n_max_ + 1; }
  Cutoff doubled() const { return Cutoff(2 * n_max_); }

  friend bool operator==(Cutoff, Cutoff) = default;

private:
  int n_max_;
};

/// Tensor layout of an operator's basis.
///
/// Two-mode objects are ordered with the first (up) mode major:
/// index = n_up * (n_max + 1) + n_down. This ordering is part of the public contract.
class ModeStructure {
public:
  enum class Kind { generic, single_mode, two_mode };

  static ModeStructure generic() { return ModeStructure(Kind::generic, 0); }
  static ModeStructure single_mode(Cutoff c) { return ModeStructure(Kind::single_mode, c.n_max()); }
  static ModeStructure two_mode(Cutoff c) { return ModeStructure(Kind::two_mode, c.n_max()); }

  Kind kind() const { return kind_; }
  bool is_fock() const { return kind_ != Kind::generic; }
  int n_max() const { return n_max_; }

  // Basis dimension implied by the structure; generic spaces report -1.
  Eigen::Index dim() const {
    switch (kind_) {
      case Kind::single_mode: return n_max_ + 1;
      case Kind::two_mode: return Eigen::Index(n_max_ + 1) * (n_max_ + 1);
      default: return -1;
    }
  }

  // Largest total photon number representable in the basis.
  int max_total_photons() const {
    switch (kind_) {
      case Kind::single_mode: return n_max_;
      case Kind::two_mode: return 2 * n_max_;
      default: throw PreconditionError("ModeStructure: generic spaces carry no photon number");
    }
  }

  // Total photon number of basis state `index`.
  int total_photons(Eigen::Index index) const {
    switch (kind_) {
      case Kind::single_mode: return int(index);
      case Kind::two_mode: return int(index / (n_max_ + 1) + index % (n_max_ + 1));
      default: throw PreconditionError("ModeStructure: generic spaces carry no photon number");
    }
  }

  friend bool operator==(const ModeStructure&, const ModeStructure&) = default;

private:
  ModeStructure(Kind k, int n) : kind_(k), n_max_(n) {}
  Kind kind_;
  int n_max_;
};

}  // namespace qimetro
