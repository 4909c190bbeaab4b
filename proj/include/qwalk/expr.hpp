#ifndef QWALK_EXPR_HPP
#define QWALK_EXPR_HPP

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>

#include "qwalk/linalg.hpp"

namespace qwalk {

struct ExprError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Arithmetic over numbers, pi and named variables: "(alpha + pi)/3", "-pi/12", "2*pi/3".
class ExprParser {
 public:
  ExprParser(std::string text, const std::map<std::string, double>& vars) : s_(std::move(text)), vars_(vars) {}

  double parse()
  {
    const double v = sum();
    skip();
    if (p_ != s_.size()) fail("unexpected '" + std::string(1, s_[p_]) + "'");
    return v;
  }

 private:
  std::string s_;
  const std::map<std::string, double>& vars_;
  std::size_t p_ = 0;

  [[noreturn]] void fail(const std::string& why) const { throw ExprError("bad expression '" + s_ + "': " + why); }

  void skip()
  {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }

  bool eat(char c)
  {
    skip();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }

  double sum()
  {
    double v = product();
    for (;;) {
      if (eat('+'))
        v += product();
      else if (eat('-'))
        v -= product();
      else
        return v;
    }
  }

  double product()
  {
    double v = unary();
    for (;;) {
      if (eat('*'))
        v *= unary();
      else if (eat('/')) {
        const double d = unary();
        if (d == 0) fail("division by zero");
        v /= d;
      } else
        return v;
    }
  }

  double unary()
  {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }

  double atom()
  {
    skip();
    if (eat('(')) {
      const double v = sum();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (p_ >= s_.size()) fail("unexpected end");
    const char c = s_[p_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* b = s_.c_str() + p_;
      char* e = nullptr;
      const double v = std::strtod(b, &e);
      if (e == b) fail("bad number");
      p_ += static_cast<std::size_t>(e - b);
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t b = p_;
      while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
      const std::string name = s_.substr(b, p_ - b);
      if (name == "pi") return pi;
      const auto it = vars_.find(name);
      if (it == vars_.end()) fail("unknown symbol '" + name + "'");
      return it->second;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

inline double eval_expr(const std::string& text, const std::map<std::string, double>& vars = {})
{
  return ExprParser(text, vars).parse();
}

}  // namespace qwalk

#endif  // QWALK_EXPR_HPP
