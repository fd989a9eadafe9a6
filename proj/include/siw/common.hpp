#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace siw {

using cplx = std::complex<double>;

enum class Layer { Upper, Lower };

// Which nonlinear formulation a run evolves.
enum class Mode { NoSurfaceTension, SurfaceTension };

// Kernels come in an OpenMP flavor and a plain serial flavor; the serial one is
// the reference the tests compare against.
enum class Exec { Serial, Parallel };

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DiffeoError : std::runtime_error {
  DiffeoError(const std::string& what, double min_j) : std::runtime_error(what), min_j(min_j) {}
  double min_j;
};

struct NonContractionError : std::runtime_error {
  NonContractionError(const std::string& what, double previous, double last)
      : std::runtime_error(what), previous(previous), last(last) {}
  double previous;
  double last;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const char* to_string(Mode m) {
  return m == Mode::SurfaceTension ? "surface_tension" : "no_surface_tension";
}

}  // namespace siw
