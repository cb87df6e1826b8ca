#include "tutorweb/rational.hpp"

#include <cctype>
#include <numeric>
#include <set>
#include <vector>

#include "tutorweb/error.hpp"

namespace tutorweb {

namespace {

[[noreturn]] void overflow() { throw Error(ErrorCode::ExpressionError, "rational overflow"); }

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) overflow();
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) overflow();
  return out;
}

std::int64_t checked_pow10(int exponent) {
  std::int64_t out = 1;
  for (int i = 0; i < exponent; ++i) out = checked_mul(out, 10);
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const Bindings* bindings) : text_(text), bindings_(bindings) {}

  Rational parse() {
    Rational value = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return value;
  }

  std::set<std::string> identifiers;

 private:
  Rational sum() {
    Rational value = product();
    for (;;) {
      skip_space();
      if (eat('+')) {
        value = value + product();
      } else if (eat('-')) {
        value = value - product();
      } else {
        return value;
      }
    }
  }

  Rational product() {
    Rational value = unary();
    for (;;) {
      skip_space();
      if (eat('*')) {
        value = value * unary();
      } else if (eat('/')) {
        Rational divisor = unary();
        if (bindings_ == nullptr) continue;  // identifier scan only
        if (divisor.is_zero()) fail("division by zero");
        value = value / divisor;
      } else {
        return value;
      }
    }
  }

  Rational unary() {
    skip_space();
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }

  Rational primary() {
    skip_space();
    if (eat('(')) {
      Rational value = sum();
      skip_space();
      if (!eat(')')) fail("missing ')'");
      return value;
    }
    if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        ++pos_;
      }
      return Rational::parse(text_.substr(start, pos_ - start));
    }
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string name(text_.substr(start, pos_ - start));
      identifiers.insert(name);
      if (bindings_ == nullptr) return Rational(1);
      auto it = bindings_->find(name);
      if (it == bindings_->end()) fail("unbound identifier '" + name + "'");
      return it->second;
    }
    fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'"
                             : "unexpected end of expression");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) {
    throw Error(ErrorCode::ExpressionError, message + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  const Bindings* bindings_;
  std::size_t pos_ = 0;
};

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::ExpressionError, "division by zero");
  if (den < 0) {
    num = checked_mul(num, -1);
    den = checked_mul(den, -1);
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    const Rational p = parse(text.substr(0, slash));
    const Rational q = parse(text.substr(slash + 1));
    if (q.is_zero()) throw Error(ErrorCode::ExpressionError, "zero denominator");
    return p / q;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) negative = text[pos++] == '-';
  std::int64_t mantissa = 0;
  int scale = 0;
  bool digits = false;
  bool dot = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = checked_add(checked_mul(mantissa, 10), c - '0');
      if (dot) ++scale;
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  int exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) exp_negative = text[pos++] == '-';
    bool exp_digits = false;
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      exponent = exponent * 10 + (text[pos] - '0');
      if (exponent > 18) overflow();
      exp_digits = true;
    }
    if (!exp_digits) digits = false;
    if (exp_negative) exponent = -exponent;
  }
  if (!digits || pos != text.size()) {
    throw Error(ErrorCode::ExpressionError, "malformed number '" + std::string(text) + "'");
  }
  const int net = exponent - scale;
  Rational value = net >= 0 ? Rational(checked_mul(mantissa, checked_pow10(net)))
                            : Rational(mantissa, checked_pow10(-net));
  return negative ? -value : value;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  std::int64_t d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1 || std::max(twos, fives) > 17) {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }
  const int places = std::max(twos, fives);
  const std::int64_t scale = checked_pow10(places);
  const std::int64_t scaled = checked_mul(num_, scale / den_);
  const std::int64_t magnitude = scaled < 0 ? -scaled : scaled;
  std::string digits = std::to_string(magnitude % scale);
  digits.insert(0, static_cast<std::size_t>(places) - digits.size(), '0');
  return (scaled < 0 ? "-" : "") + std::to_string(magnitude / scale) + "." + digits;
}

Rational operator+(const Rational& a, const Rational& b) {
  const std::int64_t g = std::gcd(a.den_, b.den_);
  return Rational(checked_add(checked_mul(a.num_, b.den_ / g), checked_mul(b.num_, a.den_ / g)),
                  checked_mul(a.den_, b.den_ / g));
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  const std::int64_t g1 = std::gcd(a.num_, b.den_);
  const std::int64_t g2 = std::gcd(b.num_, a.den_);
  const std::int64_t n1 = g1 == 0 ? a.num_ : a.num_ / g1;
  const std::int64_t d2 = g1 == 0 ? b.den_ : b.den_ / g1;
  const std::int64_t n2 = g2 == 0 ? b.num_ : b.num_ / g2;
  const std::int64_t d1 = g2 == 0 ? a.den_ : a.den_ / g2;
  return Rational(checked_mul(n1, n2), checked_mul(d1, d2));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw Error(ErrorCode::ExpressionError, "division by zero");
  return a * Rational(b.den_, b.num_);
}

Rational Rational::operator-() const {
  Rational out;
  out.num_ = checked_mul(num_, -1);
  out.den_ = den_;
  return out;
}

bool operator<(const Rational& a, const Rational& b) {
  __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
  __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
  return lhs < rhs;
}

std::int64_t Rational::floor_div(const Rational& a, const Rational& b) {
  const Rational q = a / b;
  std::int64_t f = q.num_ / q.den_;
  if (q.num_ % q.den_ != 0 && q.num_ < 0) --f;
  return f;
}

Rational evaluate_expression(std::string_view expression, const Bindings& bindings) {
  return Parser(expression, &bindings).parse();
}

std::vector<std::string> expression_identifiers(std::string_view expression) {
  Parser parser(expression, nullptr);
  parser.parse();
  return {parser.identifiers.begin(), parser.identifiers.end()};
}

}  // namespace tutorweb
