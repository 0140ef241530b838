#include "abfrac/sysdsl.hpp"

#include <cctype>
#include <cstdio>
#include <limits>
#include <utility>
#include <cmath>
#include <random>

namespace abfrac::sysdsl {

namespace {

using ast::Fn;
using ast::Kind;
using ast::Node;
using ast::NodePtr;

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

struct Token {
  enum Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Type type = End;
  double number = 0.0;
  std::string ident;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      bump();
    }
    current_ = Token{};
    current_.line = line_;
    current_.col = col_;
    if (pos_ >= src_.size()) {
      current_.type = Token::End;
      return;
    }
    const char c = src_[pos_];
    switch (c) {
      case '+': current_.type = Token::Plus; bump(); return;
      case '-': current_.type = Token::Minus; bump(); return;
      case '*': current_.type = Token::Star; bump(); return;
      case '/': current_.type = Token::Slash; bump(); return;
      case '^': current_.type = Token::Caret; bump(); return;
      case '(': current_.type = Token::LParen; bump(); return;
      case ')': current_.type = Token::RParen; bump(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        bump();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        bump();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            bump();
          }
        } else {
          pos_ = save;  // lone 'e' belongs to the next token
        }
      }
      try {
        current_.number = std::stod(src_.substr(start, pos_ - start));
      } catch (const std::exception&) {
        throw ParseError("malformed numeric literal", current_.line, current_.col);
      }
      current_.type = Token::Number;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        bump();
      }
      current_.type = Token::Ident;
      current_.ident = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token current_;
};

class Parser {
 public:
  Parser(const std::string& src, const Dims& dims) : lex_(src), dims_(dims) {}

  NodePtr run() {
    NodePtr e = additive();
    const Token& t = lex_.peek();
    if (t.type != Token::End) {
      throw ParseError("unexpected trailing input", t.line, t.col);
    }
    return e;
  }

 private:
  NodePtr additive() {
    NodePtr lhs = multiplicative();
    while (true) {
      const Token::Type ty = lex_.peek().type;
      if (ty != Token::Plus && ty != Token::Minus) return lhs;
      lex_.take();
      NodePtr rhs = multiplicative();
      lhs = make_node({ty == Token::Plus ? Kind::Add : Kind::Sub, 0, 0, Fn::Sin,
                       lhs, rhs});
    }
  }

  NodePtr multiplicative() {
    NodePtr lhs = unary();
    while (true) {
      const Token::Type ty = lex_.peek().type;
      if (ty != Token::Star && ty != Token::Slash) return lhs;
      lex_.take();
      NodePtr rhs = unary();
      lhs = make_node({ty == Token::Star ? Kind::Mul : Kind::Div, 0, 0, Fn::Sin,
                       lhs, rhs});
    }
  }

  NodePtr unary() {
    if (lex_.peek().type == Token::Minus) {
      lex_.take();
      return make_node({Kind::Neg, 0, 0, Fn::Sin, unary(), nullptr});
    }
    return power();
  }

  // '^' is right-associative and binds above unary minus; the exponent may
  // itself carry a sign, as in x1^-2.
  NodePtr power() {
    NodePtr base = primary();
    if (lex_.peek().type == Token::Caret) {
      lex_.take();
      NodePtr exp = unary();
      return make_node({Kind::Pow, 0, 0, Fn::Sin, base, exp});
    }
    return base;
  }

  NodePtr primary() {
    Token t = lex_.take();
    switch (t.type) {
      case Token::Number:
        return make_node({Kind::Literal, t.number, 0, Fn::Sin, nullptr, nullptr});
      case Token::LParen: {
        NodePtr e = additive();
        expect(Token::RParen, ")");
        return e;
      }
      case Token::Ident:
        return identifier(t);
      default:
        throw ParseError("expected a value", t.line, t.col);
    }
  }

  NodePtr identifier(const Token& t) {
    const std::string& s = t.ident;
    if (s == "t") return make_node({Kind::Time, 0, 0, Fn::Sin, nullptr, nullptr});
    static const std::pair<const char*, Fn> fns[] = {
        {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"tanh", Fn::Tanh},
        {"exp", Fn::Exp}, {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}};
    for (const auto& [name, fn] : fns) {
      if (s == name) {
        expect(Token::LParen, "(");
        NodePtr arg = additive();
        expect(Token::RParen, ")");
        return make_node({Kind::Call, 0, 0, fn, arg, nullptr});
      }
    }
    if ((s[0] == 'x' || s[0] == 'u') && s.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < s.size(); ++i) {
        digits = digits && std::isdigit(static_cast<unsigned char>(s[i]));
      }
      if (digits) {
        const int idx = std::stoi(s.substr(1));
        const bool state = s[0] == 'x';
        const int limit = state ? dims_.n_states : dims_.n_inputs;
        if (idx < 1 || idx > limit) {
          throw ParseError("variable " + s + " out of range (declared " +
                               (state ? "n=" : "m=") + std::to_string(limit) + ")",
                           t.line, t.col);
        }
        return make_node(
            {state ? Kind::StateVar : Kind::InputVar, 0, idx, Fn::Sin, nullptr, nullptr});
      }
    }
    throw ParseError("unknown identifier or function '" + s + "'", t.line, t.col);
  }

  void expect(Token::Type ty, const char* what) {
    Token t = lex_.take();
    if (t.type != ty) {
      throw ParseError(std::string("expected '") + what + "'", t.line, t.col);
    }
  }

  Lexer lex_;
  Dims dims_;
};

double eval_node(const Node& n, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 double t) {
  switch (n.kind) {
    case Kind::Literal: return n.value;
    case Kind::StateVar: return x(n.index - 1);
    case Kind::InputVar: return u(n.index - 1);
    case Kind::Time: return t;
    case Kind::Neg: return -eval_node(*n.a, x, u, t);
    case Kind::Add: return eval_node(*n.a, x, u, t) + eval_node(*n.b, x, u, t);
    case Kind::Sub: return eval_node(*n.a, x, u, t) - eval_node(*n.b, x, u, t);
    case Kind::Mul: return eval_node(*n.a, x, u, t) * eval_node(*n.b, x, u, t);
    case Kind::Div: return eval_node(*n.a, x, u, t) / eval_node(*n.b, x, u, t);
    case Kind::Pow:
      return std::pow(eval_node(*n.a, x, u, t), eval_node(*n.b, x, u, t));
    case Kind::Call: {
      const double v = eval_node(*n.a, x, u, t);
      switch (n.fn) {
        case Fn::Sin: return std::sin(v);
        case Fn::Cos: return std::cos(v);
        case Fn::Tanh: return std::tanh(v);
        case Fn::Exp: return std::exp(v);
        case Fn::Sqrt: return std::sqrt(v);
        case Fn::Abs: return std::fabs(v);
      }
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void print_node(const Node& n, std::string& out) {
  const auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.a, out);
    out += op;
    print_node(*n.b, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::Literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Kind::StateVar: out += "x" + std::to_string(n.index); return;
    case Kind::InputVar: out += "u" + std::to_string(n.index); return;
    case Kind::Time: out += "t"; return;
    case Kind::Neg:
      out += "(-";
      print_node(*n.a, out);
      out += ')';
      return;
    case Kind::Add: binary(" + "); return;
    case Kind::Sub: binary(" - "); return;
    case Kind::Mul: binary("*"); return;
    case Kind::Div: binary("/"); return;
    case Kind::Pow: binary("^"); return;
    case Kind::Call: {
      static const char* names[] = {"sin", "cos", "tanh", "exp", "sqrt", "abs"};
      out += names[static_cast<int>(n.fn)];
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
    }
  }
}

void collect_deps(const Node& n, Dependencies& d) {
  switch (n.kind) {
    case Kind::StateVar: d.states.insert(n.index); break;
    case Kind::InputVar: d.inputs.insert(n.index); break;
    case Kind::Time: d.time = true; break;
    default: break;
  }
  if (n.a) collect_deps(*n.a, d);
  if (n.b) collect_deps(*n.b, d);
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Literal:
      if (a.value != b.value) return false;
      break;
    case Kind::StateVar:
    case Kind::InputVar:
      if (a.index != b.index) return false;
      break;
    case Kind::Call:
      if (a.fn != b.fn) return false;
      break;
    default: break;
  }
  if ((a.a == nullptr) != (b.a == nullptr)) return false;
  if ((a.b == nullptr) != (b.b == nullptr)) return false;
  if (a.a && !equal_nodes(*a.a, *b.a)) return false;
  if (a.b && !equal_nodes(*a.b, *b.b)) return false;
  return true;
}

}  // namespace

Expr parse(const std::string& source, const Dims& dims) {
  return Expr(Parser(source, dims).run());
}

double eval(const Expr& e, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
            double t) {
  if (!e.valid()) throw std::invalid_argument("eval: empty expression");
  return eval_node(e.root(), x, u, t);
}

std::string to_string(const Expr& e) {
  if (!e.valid()) return "";
  std::string out;
  print_node(e.root(), out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.valid() != b.valid()) return false;
  if (!a.valid()) return true;
  return equal_nodes(a.root(), b.root());
}

Dependencies dependencies(const Expr& e) {
  Dependencies d;
  if (e.valid()) collect_deps(e.root(), d);
  return d;
}

VectorField parse_field(const std::vector<std::string>& sources, const Dims& dims) {
  VectorField f;
  f.dims = dims;
  f.components.reserve(sources.size());
  for (const auto& s : sources) f.components.push_back(parse(s, dims));
  return f;
}

Eigen::VectorXd eval_field(const VectorField& f, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, double t) {
  Eigen::VectorXd out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) out(i) = eval(f.components[i], x, u, t);
  return out;
}

Eigen::MatrixXd jacobian_fd(const VectorField& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("jacobian_fd: h must be positive");
  Eigen::MatrixXd J(f.size(), x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (eval_field(f, xp, u, t) - eval_field(f, xm, u, t)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  if (!J.allFinite()) {
    throw std::domain_error("jacobian_fd: NaN/inf entries in the difference stencil");
  }
  return J;
}

double lipschitz_estimate(const VectorField& f, const Box& box, int samples,
                          std::uint64_t seed, const Eigen::VectorXd& u, double t) {
  if (samples < 100) {
    throw std::invalid_argument("lipschitz_estimate: needs at least 100 samples");
  }
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0 ||
      ((box.hi - box.lo).array() < 0.0).any()) {
    throw std::invalid_argument("lipschitz_estimate: empty or inverted box");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  Eigen::VectorXd pt(box.lo.size());
  for (int s = 0; s < samples; ++s) {
    if (s == 0) {
      pt = 0.5 * (box.lo + box.hi);
    } else {
      for (Eigen::Index j = 0; j < pt.size(); ++j) {
        pt(j) = box.lo(j) + (box.hi(j) - box.lo(j)) * u01(rng);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian_fd(f, pt, u, t));
    worst = std::max(worst, svd.singularValues()(0));
  }
  return 1.05 * worst;  // documented upward bias
}

}  // namespace abfrac::sysdsl
