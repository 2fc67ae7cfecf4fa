#pragma once

#include <stdexcept>
#include <string>

namespace quadsig {

// Argument lies outside the mathematical domain of a formula (arccos argument
// out of range, cap-bound hypothesis violated, pole of a closed form).
class out_of_domain : public std::domain_error {
 public:
  explicit out_of_domain(const std::string& what) : std::domain_error(what) {}
};

// Caller asked for something the theory refuses, e.g. a rate at or below the
// identification rate.
class precondition_failed : public std::logic_error {
 public:
  explicit precondition_failed(const std::string& what) : std::logic_error(what) {}
};

// Input data carries no usable information (e.g. every probability is zero).
class degenerate_input : public std::invalid_argument {
 public:
  explicit degenerate_input(const std::string& what) : std::invalid_argument(what) {}
};

// A construction ran past its configured work budget.
class budget_exceeded : public std::runtime_error {
 public:
  explicit budget_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// Should be unreachable when preconditions hold.
class internal_error : public std::logic_error {
 public:
  explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace quadsig
