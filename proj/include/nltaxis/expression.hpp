#pragma once

// Small arithmetic expression trees in the state variables c and v, used for
// user-defined coefficient functions in config files.
//
// Grammar:  expr := term (('+'|'-') term)*
//           term := unary (('*'|'/') unary)*
//           unary := ('-'|'+') unary | power
//           power := atom ('^' unary)?
//           atom := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nltaxis/grid.hpp"

namespace nltaxis {

class Expression {
 public:
  /// `constants` are substituted at parse time; the free variables are c and v.
  static Expression parse(const std::string& text,
                          const std::map<std::string, double>& constants = {}) {
    Parser p{text, 0, constants};
    auto root = p.expr();
    p.skip();
    if (p.pos != text.size())
      throw ConfigError("unexpected '" + text.substr(p.pos, 1) + "' in expression '" + text + "'");
    return Expression(text, std::move(root));
  }

  double operator()(double c, double v) const { return root_->eval(c, v); }
  const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double c, double v) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Number : Node {
    double x;
    explicit Number(double x_) : x(x_) {}
    double eval(double, double) const override { return x; }
  };
  struct Var : Node {
    bool is_c;
    explicit Var(bool c_) : is_c(c_) {}
    double eval(double c, double v) const override { return is_c ? c : v; }
  };
  struct Binary : Node {
    char op;
    Ptr a, b;
    Binary(char o, Ptr x, Ptr y) : op(o), a(std::move(x)), b(std::move(y)) {}
    double eval(double c, double v) const override {
      const double x = a->eval(c, v), y = b->eval(c, v);
      switch (op) {
        case '+': return x + y;
        case '-': return x - y;
        case '*': return x * y;
        case '/': return x / y;
        case '^': return std::pow(x, y);
      }
      return 0.0;
    }
  };
  struct Negate : Node {
    Ptr a;
    explicit Negate(Ptr x) : a(std::move(x)) {}
    double eval(double c, double v) const override { return -a->eval(c, v); }
  };
  struct Call : Node {
    std::string name;
    std::vector<Ptr> args;
    double eval(double c, double v) const override {
      const double x = args[0]->eval(c, v);
      if (name == "exp") return std::exp(x);
      if (name == "log") return std::log(x);
      if (name == "sqrt") return std::sqrt(x);
      if (name == "abs") return std::abs(x);
      const double y = args[1]->eval(c, v);
      if (name == "min") return std::min(x, y);
      if (name == "max") return std::max(x, y);
      return std::pow(x, y);  // pow
    }
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;
    const std::map<std::string, double>& constants;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char ch) {
      skip();
      if (pos < s.size() && s[pos] == ch) {
        ++pos;
        return true;
      }
      return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError(what + " at offset " + std::to_string(pos) + " in expression '" + s + "'");
    }

    Ptr expr() {
      Ptr lhs = term();
      for (;;) {
        if (eat('+')) lhs = std::make_shared<Binary>('+', lhs, term());
        else if (eat('-')) lhs = std::make_shared<Binary>('-', lhs, term());
        else return lhs;
      }
    }
    Ptr term() {
      Ptr lhs = unary();
      for (;;) {
        if (eat('*')) lhs = std::make_shared<Binary>('*', lhs, unary());
        else if (eat('/')) lhs = std::make_shared<Binary>('/', lhs, unary());
        else return lhs;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Negate>(unary());
      if (eat('+')) return unary();
      return power();
    }
    Ptr power() {
      Ptr base = atom();
      if (eat('^')) return std::make_shared<Binary>('^', base, unary());
      return base;
    }
    Ptr atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      if (eat('(')) {
        Ptr e = expr();
        if (!eat(')')) fail("missing ')'");
        return e;
      }
      const char ch = s[pos];
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        const double x = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos += static_cast<std::size_t>(end - begin);
        return std::make_shared<Number>(x);
      }
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        const std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
          ++pos;
        const std::string name = s.substr(start, pos - start);
        if (eat('(')) {
          auto call = std::make_shared<Call>();
          call->name = name;
          call->args.push_back(expr());
          while (eat(',')) call->args.push_back(expr());
          if (!eat(')')) fail("missing ')' after arguments");
          const bool unary_fn = name == "exp" || name == "log" || name == "sqrt" || name == "abs";
          const bool binary_fn = name == "min" || name == "max" || name == "pow";
          if (!unary_fn && !binary_fn) fail("unknown function '" + name + "'");
          if (call->args.size() != (unary_fn ? 1u : 2u)) fail("wrong arity for '" + name + "'");
          return call;
        }
        if (name == "c") return std::make_shared<Var>(true);
        if (name == "v") return std::make_shared<Var>(false);
        if (auto it = constants.find(name); it != constants.end())
          return std::make_shared<Number>(it->second);
        fail("unknown name '" + name + "'");
      }
      fail("unexpected character");
    }
  };

  Expression(std::string text, Ptr root) : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  Ptr root_;
};

}  // namespace nltaxis
