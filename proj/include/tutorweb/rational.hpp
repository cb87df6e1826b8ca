#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tutorweb {

// Exact rational over int64 with overflow detection. Arithmetic that would
// overflow or divide by zero throws Error(ExpressionError).
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  // Parses "3", "-2.75", "1e3" style decimals and "p/q" fractions.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Integers print bare, terminating decimals print exactly, anything else as p/q.
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const;

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }

  // floor(a / b) for positive b.
  static std::int64_t floor_div(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

using Bindings = std::map<std::string, Rational>;

// Arithmetic over + - * / with parentheses, unary minus, numeric literals and
// identifiers. Unknown identifiers and division by zero throw ExpressionError.
Rational evaluate_expression(std::string_view expression, const Bindings& bindings);

// Identifiers referenced by an expression, sorted and deduplicated.
std::vector<std::string> expression_identifiers(std::string_view expression);

}  // namespace tutorweb
