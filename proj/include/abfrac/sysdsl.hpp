#pragma once

#include <Eigen/Dense>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace abfrac::sysdsl {

/// Declared dimensions an expression may reference: states x1..xn,
/// inputs u1..um, and time t.
struct Dims {
  int n_states = 0;
  int n_inputs = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line;
  int col;
};

namespace ast {

enum class Kind { Literal, StateVar, InputVar, Time, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Sin, Cos, Tanh, Exp, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind;
  double value = 0.0;  // Literal
  int index = 0;       // StateVar/InputVar, 1-based
  Fn fn = Fn::Sin;     // Call
  NodePtr a, b;
};

}  // namespace ast

/// Immutable parsed expression; cheap to copy and safe to share across threads.
class Expr {
 public:
  Expr() = default;
  explicit Expr(ast::NodePtr root) : root_(std::move(root)) {}
  bool valid() const { return root_ != nullptr; }
  const ast::Node& root() const { return *root_; }
  ast::NodePtr node() const { return root_; }

 private:
  ast::NodePtr root_;
};

/// Parse `source` against the declared dimensions. Grammar: literals,
/// x<k>/u<k>/t, binary + - * / ^ (^ right-associative, binding above unary
/// minus), unary minus, the functions sin cos tanh exp sqrt abs, parentheses.
Expr parse(const std::string& source, const Dims& dims);

/// IEEE evaluation; domain violations produce NaN, never a trap.
double eval(const Expr& e, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
            double t);

/// Unparse to a fully parenthesized string; reparsing yields the same tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

struct Dependencies {
  std::set<int> states;  // 1-based indices
  std::set<int> inputs;
  bool time = false;
};

/// Exact syntactic dependency set.
Dependencies dependencies(const Expr& e);

/// A vector field: one expression per component, with shared dimensions.
struct VectorField {
  Dims dims;
  std::vector<Expr> components;

  Eigen::Index size() const { return static_cast<Eigen::Index>(components.size()); }
};

VectorField parse_field(const std::vector<std::string>& sources, const Dims& dims);

Eigen::VectorXd eval_field(const VectorField& f, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, double t);

/// Central-difference Jacobian with respect to the state, error O(h^2).
/// NaN entries are reported by throwing std::domain_error.
Eigen::MatrixXd jacobian_fd(const VectorField& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, double t, double h = 1e-5);

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// Sampled Lipschitz-constant estimate: the largest Jacobian spectral norm
/// over `samples` points of the box (plus corner/center probes), inflated
/// by a 5% safety factor. Sampling is deterministic for a given seed.
double lipschitz_estimate(const VectorField& f, const Box& box, int samples,
                          std::uint64_t seed = 20240501,
                          const Eigen::VectorXd& u = Eigen::VectorXd(),
                          double t = 0.0);

}  // namespace abfrac::sysdsl
