#pragma once

#include <stdexcept>
#include <string>

namespace qgauge {

// Base of every error the library raises.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class invalid_argument : public error {
public:
  using error::error;
};

// Two points that must be distinct coincide (the contact term is not modelled).
class degenerate_separation : public error {
public:
  using error::error;
};

// [X,[X,Y]] != 0, so the closed-form adjoint action does not apply.
class bch_order_violation : public error {
public:
  using error::error;
};

class oracle_too_large : public error {
public:
  using error::error;
};

// A charge path passes through (or too close to) the field point.
class path_singularity : public error {
public:
  explicit path_singularity(const std::string& what, std::size_t segment)
      : error(what), segment_(segment) {}

  std::size_t segment() const noexcept { return segment_; }

private:
  std::size_t segment_;
};

// Configuration rejected before any computation.
class validation_error : public error {
public:
  using error::error;
};

} // namespace qgauge
