#pragma once

// Arithmetic task: evaluate an integer expression tree step by step.
//
// A trajectory step is either a computed line "lhs op rhs = value" or the
// final "### answer = value". The policy emits the next ready sub-computation
// and applies the operator correctly with probability q, otherwise it writes
// a corrupted value; wrong values propagate into later lines, so single
// rollouts are unreliable and recombination has real work to do.
//
// Sub-goal verifiers check for the exactly-correct line of one expression
// node, anywhere in the trajectory, which makes them stitch-friendly: a
// spliced candidate inherits every correct line of its parents.

#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bes/tasks/base.hpp"

namespace bes::tasks {

namespace arith {

struct ExprNode {
    char op = 0; // 0 = literal
    std::int64_t literal = 0;
    std::unique_ptr<ExprNode> left, right;

    bool is_literal() const { return op == 0; }
};

inline std::int64_t apply_op(char op, std::int64_t a, std::int64_t b) {
    switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return b == 0 ? 0 : a / b; // guarded: corrupted operands may divide by 0
    }
    throw std::logic_error("apply_op: unknown operator");
}

inline std::int64_t eval(const ExprNode& e) {
    if (e.is_literal()) return e.literal;
    return apply_op(e.op, eval(*e.left), eval(*e.right));
}

inline std::string to_text(const ExprNode& e) {
    if (e.is_literal()) return std::to_string(e.literal);
    return "(" + to_text(*e.left) + " " + std::string(1, e.op) + " " + to_text(*e.right) + ")";
}

// Recursive-descent parser: + - at the lowest precedence, * / above, then
// parenthesized groups and (optionally signed) integer literals.
class Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    std::unique_ptr<ExprNode> parse() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

  private:
    std::unique_ptr<ExprNode> parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
                const char op = s_[pos_++];
                lhs = make_node(op, std::move(lhs), parse_product());
            } else {
                return lhs;
            }
        }
    }

    std::unique_ptr<ExprNode> parse_product() {
        auto lhs = parse_atom();
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
                const char op = s_[pos_++];
                lhs = make_node(op, std::move(lhs), parse_atom());
            } else {
                return lhs;
            }
        }
    }

    std::unique_ptr<ExprNode> parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        if (s_[pos_] == '(') {
            ++pos_;
            auto e = parse_sum();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
            ++pos_;
            return e;
        }
        bool neg = false;
        if (s_[pos_] == '-') {
            neg = true;
            ++pos_;
        }
        skip_ws();
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            fail("expected integer literal");
        std::int64_t v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            v = v * 10 + (s_[pos_++] - '0');
        auto node = std::make_unique<ExprNode>();
        node->literal = neg ? -v : v;
        return node;
    }

    static std::unique_ptr<ExprNode> make_node(char op, std::unique_ptr<ExprNode> l,
                                               std::unique_ptr<ExprNode> r) {
        auto node = std::make_unique<ExprNode>();
        node->op = op;
        node->left = std::move(l);
        node->right = std::move(r);
        return node;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("expression parse error at offset " + std::to_string(pos_) +
                                    ": " + why);
    }

    void skip_ws() {
        while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline std::unique_ptr<ExprNode> parse(std::string_view s) { return Parser(s).parse(); }

/// Random full expression tree over {+,-,*} with literals in [-9,9]. Division
/// is excluded here (an exact integer divisor forces a literal right operand,
/// which degenerates the tree depth); the parser and policy still support it.
inline std::unique_ptr<ExprNode> generate(std::uint32_t depth, RngStream& rng) {
    if (depth == 0) {
        auto n = std::make_unique<ExprNode>();
        n->literal = rng.uniform_int(-9, 9);
        return n;
    }
    static constexpr char kOps[3] = {'+', '-', '*'};
    auto n = std::make_unique<ExprNode>();
    n->op = kOps[rng.uniform_index(3)];
    n->left = generate(depth - 1, rng);
    n->right = generate(depth - 1, rng);
    return n;
}

inline std::string format_line(std::int64_t a, char op, std::int64_t b, std::int64_t v) {
    return std::to_string(a) + " " + std::string(1, op) + " " + std::to_string(b) + " = " +
           std::to_string(v);
}

inline constexpr const char* kAnswerPrefix = "### answer = ";

inline std::string format_answer(std::int64_t v) { return kAnswerPrefix + std::to_string(v); }

struct Line {
    std::int64_t lhs = 0, rhs = 0, value = 0;
    char op = 0;
};

inline std::optional<Line> parse_line(const std::string& payload) {
    Line ln;
    const char* p = payload.c_str();
    char* end = nullptr;
    ln.lhs = std::strtoll(p, &end, 10);
    if (end == p || *end != ' ') return std::nullopt;
    p = end + 1;
    if (*p != '+' && *p != '-' && *p != '*' && *p != '/') return std::nullopt;
    ln.op = *p++;
    if (*p != ' ') return std::nullopt;
    ++p;
    ln.rhs = std::strtoll(p, &end, 10);
    if (end == p) return std::nullopt;
    p = end;
    if (std::string_view(p).substr(0, 3) != " = ") return std::nullopt;
    p += 3;
    ln.value = std::strtoll(p, &end, 10);
    if (end == p || *end != 0) return std::nullopt;
    return ln;
}

inline std::optional<std::int64_t> parse_answer(const std::string& payload) {
    std::string_view sv(payload);
    const std::string_view prefix(kAnswerPrefix);
    if (sv.substr(0, prefix.size()) != prefix) return std::nullopt;
    const char* p = payload.c_str() + prefix.size();
    char* end = nullptr;
    const std::int64_t v = std::strtoll(p, &end, 10);
    if (end == p || *end != 0) return std::nullopt;
    return v;
}

} // namespace arith

/// See file comment. `q` is the per-application probability of a correct
/// computation; q=1 yields a deterministic solver.
class ArithmeticTask final : public TaskBundle {
  public:
    explicit ArithmeticTask(const std::string& expression, double q = 0.6)
        : text_(expression), q_(q), root_(arith::parse(expression)) {
        index_nodes(*root_, "");
    }

    std::string name() const override { return "arithmetic"; }

    std::int64_t exact_value() const { return arith::eval(*root_); }
    const std::string& expression() const { return text_; }

    // --- policy -------------------------------------------------------------

    std::optional<Step> next_step(const Trajectory& prefix, RngStream& rng) const override {
        const auto lines = collect_lines(prefix);
        Resolution memo;
        if (const auto rv = resolve(*root_, lines, memo))
            return Step{arith::format_answer(*rv)};
        // work on a uniformly drawn ready sub-computation; different rollouts
        // attack different parts of the tree
        std::vector<const arith::ExprNode*> ready;
        collect_ready_nodes(*root_, lines, memo, ready);
        if (ready.empty()) return std::nullopt; // unreachable for well-formed prefixes
        const arith::ExprNode* node = ready[rng.uniform_index(ready.size())];
        const std::int64_t a = *resolve(*node->left, lines, memo);
        const std::int64_t b = *resolve(*node->right, lines, memo);
        std::int64_t v = arith::apply_op(node->op, a, b);
        if (!rng.bernoulli(q_)) {
            std::int64_t delta = rng.uniform_int(1, 3);
            if (rng.bernoulli(0.5)) delta = -delta;
            v += delta;
        }
        return Step{arith::format_line(a, node->op, b, v)};
    }

    bool is_terminal(const Trajectory& t) const override {
        return !t.steps.empty() && arith::parse_answer(t.steps.back().payload).has_value();
    }

    // --- backward -----------------------------------------------------------

    GoalTreeState initial_tree() const override {
        const std::int64_t want = exact_value();
        VerifierFn v = [want](const Trajectory& t) {
            if (t.steps.empty()) return 0.0;
            const auto ans = arith::parse_answer(t.steps.back().payload);
            return ans && *ans == want ? 1.0 : 0.0;
        };
        return GoalTreeState::make_root("compute " + text_, std::move(v), "c:");
    }

    std::vector<GoalSpec> decompose(const Goal& leaf, RngStream&) const override {
        if (leaf.decompose_key.size() < 2) return {};
        const std::string path = leaf.decompose_key.substr(2);
        const arith::ExprNode* e = node_at(path);
        if (!e || e->is_literal()) return {};

        if (leaf.decompose_key[0] == 'a') {
            // an operator application splits into its operand computations
            std::vector<GoalSpec> out;
            if (!e->left->is_literal()) out.push_back(compute_goal(e->left.get(), path + "L"));
            if (!e->right->is_literal()) out.push_back(compute_goal(e->right.get(), path + "R"));
            return out;
        }
        if (leaf.decompose_key[0] != 'c') return {};
        if (e->left->is_literal() && e->right->is_literal()) return {}; // atomic

        // Unroll up to two operator applications along the left spine and
        // wrap the remainder in one compute goal, innermost child first.
        std::vector<const arith::ExprNode*> chain;
        std::vector<std::string> chain_paths;
        const arith::ExprNode* cur = e;
        std::string cur_path = path;
        while (chain.size() < 2 && !cur->left->is_literal()) {
            chain.push_back(cur);
            chain_paths.push_back(cur_path);
            cur = cur->left.get();
            cur_path += "L";
        }

        std::vector<GoalSpec> out;
        if (chain.empty()) {
            // left operand is a literal; the right one carries the structure
            out.push_back(compute_goal(e->right.get(), path + "R"));
            out.push_back(apply_goal(e, path));
        } else {
            out.push_back(compute_goal(cur, cur_path));
            for (std::size_t k = chain.size(); k-- > 0;)
                out.push_back(apply_goal(chain[k], chain_paths[k]));
        }
        return out;
    }

    std::optional<std::vector<Step>> enumerate_steps(const Trajectory& prefix) const override {
        // Correct-line alternatives only: one line per ready node, plus the
        // final answer once the root is resolved.
        const auto lines = collect_lines(prefix);
        Resolution memo;
        std::vector<Step> out;
        if (const auto rv = resolve(*root_, lines, memo)) {
            out.push_back(Step{arith::format_answer(*rv)});
            return out;
        }
        std::vector<const arith::ExprNode*> ready;
        collect_ready_nodes(*root_, lines, memo, ready);
        for (const arith::ExprNode* node : ready) {
            const std::int64_t a = *resolve(*node->left, lines, memo);
            const std::int64_t b = *resolve(*node->right, lines, memo);
            out.push_back(Step{arith::format_line(a, node->op, b, arith::apply_op(node->op, a, b))});
        }
        return out;
    }

    nlohmann::ordered_json spec_json() const override {
        return {{"name", "arithmetic"}, {"expression", text_}, {"q", q_}};
    }

  private:
    std::string text_;
    double q_;
    std::shared_ptr<arith::ExprNode> root_;
    std::unordered_map<std::string, const arith::ExprNode*> by_path_;

    void index_nodes(const arith::ExprNode& e, const std::string& path) {
        by_path_[path] = &e;
        if (!e.is_literal()) {
            index_nodes(*e.left, path + "L");
            index_nodes(*e.right, path + "R");
        }
    }

    const arith::ExprNode* node_at(const std::string& path) const {
        const auto it = by_path_.find(path);
        return it == by_path_.end() ? nullptr : it->second;
    }

    static std::vector<arith::Line> collect_lines(const Trajectory& t) {
        std::vector<arith::Line> lines;
        lines.reserve(t.steps.size());
        for (const auto& s : t.steps)
            if (auto ln = arith::parse_line(s.payload)) lines.push_back(*ln);
        return lines;
    }

    using Resolution = std::unordered_map<const arith::ExprNode*, std::optional<std::int64_t>>;

    /// Value a node resolves to under the trajectory's lines, last match
    /// winning, corruption and all. Literals resolve to themselves.
    static std::optional<std::int64_t> resolve(const arith::ExprNode& e,
                                               const std::vector<arith::Line>& lines,
                                               Resolution& memo) {
        if (e.is_literal()) return e.literal;
        if (auto it = memo.find(&e); it != memo.end()) return it->second;
        std::optional<std::int64_t> out;
        const auto a = resolve(*e.left, lines, memo);
        const auto b = resolve(*e.right, lines, memo);
        if (a && b) {
            for (const auto& ln : lines)
                if (ln.op == e.op && ln.lhs == *a && ln.rhs == *b) out = ln.value;
        }
        memo.emplace(&e, out);
        return out;
    }

    /// Nodes in post-order whose operands are resolved but which have no line
    /// of their own yet.
    static void collect_ready_nodes(const arith::ExprNode& e, const std::vector<arith::Line>& lines,
                                    Resolution& memo,
                                    std::vector<const arith::ExprNode*>& out) {
        if (e.is_literal()) return;
        collect_ready_nodes(*e.left, lines, memo, out);
        collect_ready_nodes(*e.right, lines, memo, out);
        if (resolve(e, lines, memo)) return;
        if (resolve(*e.left, lines, memo) && resolve(*e.right, lines, memo)) out.push_back(&e);
    }

    /// Exact-line verifier for one expression node.
    VerifierFn line_verifier(const arith::ExprNode* e) const {
        const std::int64_t a = arith::eval(*e->left);
        const std::int64_t b = arith::eval(*e->right);
        const std::string want = arith::format_line(a, e->op, b, arith::apply_op(e->op, a, b));
        return [want](const Trajectory& t) {
            for (const auto& s : t.steps)
                if (s.payload == want) return 1.0;
            return 0.0;
        };
    }

    GoalSpec compute_goal(const arith::ExprNode* e, const std::string& path) const {
        GoalSpec g;
        g.description = "compute " + arith::to_text(*e);
        g.verifier = line_verifier(e);
        g.decomposable = true;
        g.decompose_key = "c:" + path;
        return g;
    }

    GoalSpec apply_goal(const arith::ExprNode* e, const std::string& path) const {
        static const std::unordered_map<char, std::string> kVerb = {
            {'+', "add "}, {'-', "subtract "}, {'*', "multiply by "}, {'/', "divide by "}};
        GoalSpec g;
        g.description = kVerb.at(e->op) + arith::to_text(*e->right);
        g.verifier = line_verifier(e);
        // refinable into operand computations while one is non-literal
        g.decomposable = !e->left->is_literal() || !e->right->is_literal();
        g.decompose_key = "a:" + path;
        return g;
    }
};

} // namespace bes::tasks
