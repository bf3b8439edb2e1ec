#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace robroot {

// Minimal reverse-mode tape. Every node stores up to two parents and the local
// partials w.r.t. them, computed when the node was recorded.
class Tape {
public:
    enum class Op { input, constant, add, sub, mul, div, neg };

    struct Node {
        Op op;
        int p0 = -1, p1 = -1;
        double d0 = 0.0, d1 = 0.0;
        double value = 0.0;
    };

    int input(double v) {
        inputs_.push_back(static_cast<int>(nodes_.size()));
        return push({Op::input, -1, -1, 0.0, 0.0, v});
    }
    int constant(double v) { return push({Op::constant, -1, -1, 0.0, 0.0, v}); }

    int add(int x, int y) { return push({Op::add, x, y, 1.0, 1.0, val(x) + val(y)}); }
    int sub(int x, int y) { return push({Op::sub, x, y, 1.0, -1.0, val(x) - val(y)}); }
    int mul(int x, int y) { return push({Op::mul, x, y, val(y), val(x), val(x) * val(y)}); }
    int div(int x, int y) {
        double q = val(x) / val(y);
        return push({Op::div, x, y, 1.0 / val(y), -q / val(y), q});
    }
    int neg(int x) { return push({Op::neg, x, -1, -1.0, 0.0, -val(x)}); }

    double val(int i) const { return nodes_.at(i).value; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<int>& inputs() const { return inputs_; }

    // adjoint of every node w.r.t. node `out`
    std::vector<double> adjoints(int out) const {
        std::vector<double> adj(nodes_.size(), 0.0);
        adj.at(out) = 1.0;
        for (int i = out; i >= 0; --i) {
            const Node& n = nodes_[i];
            if (adj[i] == 0.0)
                continue;
            if (n.p0 >= 0)
                adj[n.p0] += n.d0 * adj[i];
            if (n.p1 >= 0)
                adj[n.p1] += n.d1 * adj[i];
        }
        return adj;
    }

    // d out / d inputs, in the order the inputs were recorded
    std::vector<double> gradient(int out) const {
        auto adj = adjoints(out);
        std::vector<double> g;
        for (int i : inputs_)
            g.push_back(adj[i]);
        return g;
    }

    // Re-evaluate every node with new input values; the recorded control flow is kept.
    std::vector<double> replay(const std::vector<double>& in) const {
        if (in.size() != inputs_.size())
            throw std::invalid_argument("Tape::replay: wrong number of inputs");
        std::vector<double> v(nodes_.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            switch (n.op) {
                case Op::input: v[i] = in[k++]; break;
                case Op::constant: v[i] = n.value; break;
                case Op::add: v[i] = v[n.p0] + v[n.p1]; break;
                case Op::sub: v[i] = v[n.p0] - v[n.p1]; break;
                case Op::mul: v[i] = v[n.p0] * v[n.p1]; break;
                case Op::div: v[i] = v[n.p0] / v[n.p1]; break;
                case Op::neg: v[i] = -v[n.p0]; break;
            }
        }
        return v;
    }

private:
    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
    std::vector<int> inputs_;
};

// Scalar that records onto a tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    double value() const { return tape->val(id); }
};

namespace detail {
inline Var lift(Tape* t, double v) { return {t, t->constant(v)}; }
}  // namespace detail

inline Var operator+(Var x, Var y) { return {x.tape, x.tape->add(x.id, y.id)}; }
inline Var operator-(Var x, Var y) { return {x.tape, x.tape->sub(x.id, y.id)}; }
inline Var operator*(Var x, Var y) { return {x.tape, x.tape->mul(x.id, y.id)}; }
inline Var operator/(Var x, Var y) { return {x.tape, x.tape->div(x.id, y.id)}; }
inline Var operator-(Var x) { return {x.tape, x.tape->neg(x.id)}; }

inline Var operator+(Var x, double y) { return x + detail::lift(x.tape, y); }
inline Var operator+(double x, Var y) { return detail::lift(y.tape, x) + y; }
inline Var operator-(Var x, double y) { return x - detail::lift(x.tape, y); }
inline Var operator-(double x, Var y) { return detail::lift(y.tape, x) - y; }
inline Var operator*(Var x, double y) { return x * detail::lift(x.tape, y); }
inline Var operator*(double x, Var y) { return detail::lift(y.tape, x) * y; }
inline Var operator/(Var x, double y) { return x / detail::lift(x.tape, y); }
inline Var operator/(double x, Var y) { return detail::lift(y.tape, x) / y; }

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

}  // namespace robroot
