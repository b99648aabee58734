#include "macroplan/pddl.hpp"
#include "macroplan/sexpr.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace macroplan {

PddlError::PddlError(const std::string &what, int line, int column)
    : std::runtime_error(line > 0 ? std::to_string(line) + ":" +
                                        std::to_string(column) + ": " + what
                                  : what),
      line_(line), column_(column) {}

std::string to_string(const Atom &atom) {
  std::string s = "(" + atom.predicate;
  for (const auto &a : atom.args)
    s += " " + a;
  return s + ")";
}

std::optional<std::size_t> Operator::param_index(std::string_view var) const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == var)
      return i;
  return std::nullopt;
}

// ---------------------------------------------------------------- types

TypeHierarchy::TypeHierarchy() {
  order_.push_back(kRoot);
  parent_.emplace(kRoot, "");
}

void TypeHierarchy::add(const std::string &type, const std::string &parent) {
  if (type == kRoot)
    return;
  if (!contains(parent))
    add(parent, kRoot);
  auto it = parent_.find(type);
  if (it != parent_.end()) {
    // A type first seen as someone's parent gets its real parent later.
    if (it->second == kRoot && parent != kRoot) {
      if (is_subtype(parent, type))
        throw PddlError("cyclic type hierarchy at '" + type + "'");
      it->second = parent;
    }
    return;
  }
  order_.push_back(type);
  parent_.emplace(type, parent);
}

bool TypeHierarchy::contains(std::string_view type) const {
  return parent_.find(type) != parent_.end();
}

std::string TypeHierarchy::parent(std::string_view type) const {
  auto it = parent_.find(type);
  return it == parent_.end() ? std::string{} : it->second;
}

std::vector<std::string> TypeHierarchy::children(std::string_view type) const {
  std::vector<std::string> out;
  for (const auto &t : order_)
    if (t != kRoot && parent(t) == type)
      out.push_back(t);
  return out;
}

bool TypeHierarchy::is_atomic(std::string_view type) const {
  return children(type).empty();
}

std::vector<std::string>
TypeHierarchy::atomic_subtypes(std::string_view type) const {
  std::vector<std::string> out;
  for (const auto &t : order_)
    if (is_atomic(t) && is_subtype(t, type))
      out.push_back(t);
  return out;
}

bool TypeHierarchy::is_subtype(std::string_view sub,
                               std::string_view super) const {
  std::string cur(sub);
  while (!cur.empty()) {
    if (cur == super)
      return true;
    cur = parent(cur);
  }
  return false;
}

std::string
TypeHierarchy::common_supertype(std::span<const std::string> types) const {
  if (types.empty())
    return kRoot;
  std::string cur = types.front();
  while (!cur.empty()) {
    bool all = std::all_of(types.begin(), types.end(), [&](const auto &t) {
      return is_subtype(t, cur);
    });
    if (all)
      return cur;
    cur = parent(cur);
  }
  return kRoot;
}

bool TypeHierarchy::is_flat() const {
  return std::all_of(order_.begin(), order_.end(), [&](const auto &t) {
    return t == kRoot || is_atomic(t);
  });
}

// ---------------------------------------------------------------- lookup

const Operator *Domain::find_operator(std::string_view n) const {
  for (const auto &op : operators)
    if (op.name == n)
      return &op;
  return nullptr;
}

const Predicate *Domain::find_predicate(std::string_view n) const {
  for (const auto &p : predicates)
    if (p.name == n)
      return &p;
  return nullptr;
}

std::string Domain::original_operator_name(const std::string &n) const {
  auto it = provenance.find(n);
  return it == provenance.end() ? n : it->second;
}

std::optional<std::string> Problem::type_of(std::string_view object) const {
  for (const auto &o : objects)
    if (o.name == object)
      return o.type;
  return std::nullopt;
}

// ---------------------------------------------------------------- parsing

namespace {

[[noreturn]] void fail(const SExpr &at, const std::string &msg) {
  throw PddlError(msg, at.line, at.column);
}

[[noreturn]] void unsupported(const SExpr &at, const std::string &msg) {
  throw UnsupportedFeature(msg, at.line, at.column);
}

[[noreturn]] void undeclared(const SExpr &at, const std::string &msg) {
  throw UndeclaredSymbol(msg, at.line, at.column);
}

const std::set<std::string> kUnsupportedHeads = {
    "forall", "exists", "when",   "or",       "imply",
    "=",      "either", "increase", "decrease", "assign"};

// Parses `a b - t c - u d` into typed names. Untyped names get `object`.
std::vector<TypedVar> parse_typed_list(const SExpr &list, std::size_t begin) {
  std::vector<TypedVar> out;
  std::vector<std::string> pending;
  for (std::size_t i = begin; i < list.size(); ++i) {
    const SExpr &e = list.items[i];
    if (e.is_list) {
      if (e.has_head("either"))
        unsupported(e, "'either' types are not supported");
      fail(e, "unexpected list in typed list");
    }
    if (e.symbol == "-") {
      if (i + 1 >= list.size())
        fail(e, "missing type after '-'");
      const SExpr &t = list.items[++i];
      if (t.is_list)
        unsupported(t, "'either' types are not supported");
      for (auto &n : pending)
        out.push_back({std::move(n), t.symbol});
      pending.clear();
      continue;
    }
    pending.push_back(e.symbol);
  }
  for (auto &n : pending)
    out.push_back({std::move(n), TypeHierarchy::kRoot});
  return out;
}

void check_unsupported(const SExpr &e) {
  if (!e.is_list || e.items.empty())
    return;
  const SExpr &head = e.items.front();
  if (head.is_symbol() && kUnsupportedHeads.count(head.symbol))
    unsupported(e, "'" + head.symbol + "' is outside the STRIPS subset");
}

Atom parse_atom(const SExpr &e) {
  if (!e.is_list || e.items.empty() || e.items.front().is_list)
    fail(e, "expected an atom");
  check_unsupported(e);
  Atom a;
  a.predicate = e.items.front().symbol;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e.items[i].is_list)
      fail(e.items[i], "nested term in atom");
    a.args.push_back(e.items[i].symbol);
  }
  return a;
}

// Conjunction of positive atoms (preconditions, goals).
std::vector<Atom> parse_conjunction(const SExpr &e) {
  std::vector<Atom> out;
  if (!e.is_list)
    fail(e, "expected a formula");
  if (e.items.empty())
    return out;
  if (e.has_head("and")) {
    for (std::size_t i = 1; i < e.size(); ++i) {
      auto sub = parse_conjunction(e.items[i]);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  if (e.has_head("not"))
    unsupported(e, "negative preconditions are not supported");
  out.push_back(parse_atom(e));
  return out;
}

void parse_effect(const SExpr &e, std::vector<Atom> &add,
                  std::vector<Atom> &del) {
  if (!e.is_list)
    fail(e, "expected an effect");
  if (e.items.empty())
    return;
  if (e.has_head("and")) {
    for (std::size_t i = 1; i < e.size(); ++i)
      parse_effect(e.items[i], add, del);
    return;
  }
  if (e.has_head("not")) {
    if (e.size() != 2)
      fail(e, "malformed negation");
    del.push_back(parse_atom(e.items[1]));
    return;
  }
  add.push_back(parse_atom(e));
}

template <typename T> void dedupe(std::vector<T> &v) {
  std::vector<T> out;
  for (auto &x : v)
    if (std::find(out.begin(), out.end(), x) == out.end())
      out.push_back(std::move(x));
  v = std::move(out);
}

void check_atom(const Domain &dom, const Atom &a, const SExpr &where,
                const Operator *op) {
  const Predicate *p = dom.find_predicate(a.predicate);
  if (!p)
    undeclared(where, "undeclared predicate '" + a.predicate + "'");
  if (p->params.size() != a.args.size())
    fail(where, "arity mismatch for '" + a.predicate + "'");
  for (const auto &arg : a.args) {
    if (is_variable(arg)) {
      if (op && !op->param_index(arg))
        undeclared(where, "variable " + arg + " not in parameters of '" +
                              op->name + "'");
    } else {
      bool is_const = std::any_of(dom.constants.begin(), dom.constants.end(),
                                  [&](const auto &c) { return c.name == arg; });
      if (!is_const)
        undeclared(where, "undeclared constant '" + arg + "'");
    }
  }
}

Operator parse_action(const SExpr &e, const Domain &dom) {
  Operator op;
  op.name = e.at(1).symbol;
  const SExpr *pre = nullptr;
  const SExpr *eff = nullptr;
  for (std::size_t i = 2; i < e.size(); i += 2) {
    const SExpr &key = e.items[i];
    if (!key.is_symbol() || i + 1 >= e.size())
      fail(key, "malformed action '" + op.name + "'");
    const SExpr &val = e.items[i + 1];
    if (key.symbol == ":parameters") {
      if (!val.is_list)
        fail(val, "expected parameter list");
      op.params = parse_typed_list(val, 0);
    } else if (key.symbol == ":precondition") {
      pre = &val;
    } else if (key.symbol == ":effect") {
      eff = &val;
    } else {
      unsupported(key, "unsupported action field '" + key.symbol + "'");
    }
  }
  std::set<std::string> seen;
  for (const auto &p : op.params) {
    if (!seen.insert(p.name).second)
      fail(e, "duplicate parameter " + p.name + " in '" + op.name + "'");
    if (!dom.types.contains(p.type))
      undeclared(e, "undeclared type '" + p.type + "'");
  }
  if (pre)
    op.pre = parse_conjunction(*pre);
  if (eff)
    parse_effect(*eff, op.add, op.del);
  dedupe(op.pre);
  dedupe(op.add);
  dedupe(op.del);
  // Delete-then-add semantics: an atom both added and deleted stays true.
  std::erase_if(op.del, [&](const Atom &d) {
    return std::find(op.add.begin(), op.add.end(), d) != op.add.end();
  });
  for (const auto *list : {&op.pre, &op.add, &op.del})
    for (const auto &a : *list)
      check_atom(dom, a, e, &op);
  return op;
}

const SExpr &expect_define(const std::vector<SExpr> &top, const char *kind) {
  if (top.size() != 1)
    throw PddlError(std::string("expected a single ") + kind + " definition");
  const SExpr &d = top.front();
  if (!d.has_head("define"))
    fail(d, "expected (define ...)");
  const SExpr &header = d.at(1);
  if (!header.has_head(kind) || header.size() != 2)
    fail(header, std::string("expected (") + kind + " <name>)");
  return d;
}

} // namespace

Domain parse_domain(std::string_view text) {
  std::vector<SExpr> top;
  try {
    top = read_sexprs(text);
  } catch (const SyntaxError &err) {
    throw PddlError(err.what());
  }
  const SExpr &d = expect_define(top, "domain");
  Domain dom;
  dom.name = d.at(1).at(1).symbol;
  for (std::size_t i = 2; i < d.size(); ++i) {
    const SExpr &sec = d.items[i];
    if (!sec.is_list || sec.items.empty() || sec.items.front().is_list)
      fail(sec, "malformed domain section");
    const std::string &key = sec.items.front().symbol;
    if (key == ":requirements") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const auto &r = sec.items[j].symbol;
        if (r != ":strips" && r != ":typing")
          unsupported(sec.items[j], "unsupported requirement " + r);
      }
    } else if (key == ":types") {
      for (const auto &tv : parse_typed_list(sec, 1))
        dom.types.add(tv.name, tv.type);
    } else if (key == ":constants") {
      dom.constants = parse_typed_list(sec, 1);
      for (const auto &c : dom.constants)
        if (!dom.types.contains(c.type))
          undeclared(sec, "undeclared type '" + c.type + "'");
    } else if (key == ":predicates") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const SExpr &p = sec.items[j];
        if (!p.is_list || p.items.empty())
          fail(p, "malformed predicate declaration");
        Predicate pred{p.items.front().symbol, parse_typed_list(p, 1)};
        std::set<std::string> seen;
        for (const auto &v : pred.params) {
          if (!seen.insert(v.name).second)
            fail(p, "duplicate variable in predicate '" + pred.name + "'");
          if (!dom.types.contains(v.type))
            undeclared(p, "undeclared type '" + v.type + "'");
        }
        if (dom.find_predicate(pred.name))
          fail(p, "duplicate predicate '" + pred.name + "'");
        dom.predicates.push_back(std::move(pred));
      }
    } else if (key == ":action") {
      Operator op = parse_action(sec, dom);
      if (dom.find_operator(op.name))
        fail(sec, "duplicate operator '" + op.name + "'");
      dom.operators.push_back(std::move(op));
    } else if (key == ":functions") {
      unsupported(sec, "numeric fluents are not supported");
    } else {
      unsupported(sec, "unsupported domain section " + key);
    }
  }
  dom.flattened = dom.types.is_flat();
  return dom;
}

Problem parse_problem(std::string_view text, const Domain &dom) {
  std::vector<SExpr> top;
  try {
    top = read_sexprs(text);
  } catch (const SyntaxError &err) {
    throw PddlError(err.what());
  }
  const SExpr &d = expect_define(top, "problem");
  Problem prob;
  prob.name = d.at(1).at(1).symbol;
  prob.objects = dom.constants;
  std::map<std::string, std::string, std::less<>> types;
  for (const auto &c : dom.constants)
    types[c.name] = c.type;

  auto check_fact = [&](const Atom &a, const SExpr &where) {
    const Predicate *p = dom.find_predicate(a.predicate);
    if (!p)
      undeclared(where, "undeclared predicate '" + a.predicate + "'");
    if (p->params.size() != a.args.size())
      fail(where, "arity mismatch for '" + to_string(a) + "'");
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      auto it = types.find(a.args[i]);
      if (it == types.end())
        undeclared(where, "undeclared object '" + a.args[i] + "' in " +
                              to_string(a));
      if (!dom.types.is_subtype(it->second, p->params[i].type))
        fail(where, "object '" + a.args[i] + "' has type " + it->second +
                        ", expected " + p->params[i].type);
    }
  };

  for (std::size_t i = 2; i < d.size(); ++i) {
    const SExpr &sec = d.items[i];
    if (!sec.is_list || sec.items.empty() || sec.items.front().is_list)
      fail(sec, "malformed problem section");
    const std::string &key = sec.items.front().symbol;
    if (key == ":domain") {
      if (sec.at(1).symbol != dom.name)
        fail(sec, "problem is for domain '" + sec.at(1).symbol +
                      "', not '" + dom.name + "'");
      prob.domain_name = sec.at(1).symbol;
    } else if (key == ":requirements") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const auto &r = sec.items[j].symbol;
        if (r != ":strips" && r != ":typing")
          unsupported(sec.items[j], "unsupported requirement " + r);
      }
    } else if (key == ":objects") {
      for (auto &o : parse_typed_list(sec, 1)) {
        if (!dom.types.contains(o.type))
          undeclared(sec, "unknown type '" + o.type + "' for object '" +
                              o.name + "'");
        if (types.count(o.name))
          fail(sec, "duplicate object '" + o.name + "'");
        types[o.name] = o.type;
        prob.objects.push_back(std::move(o));
      }
    } else if (key == ":init") {
      for (std::size_t j = 1; j < sec.size(); ++j) {
        const SExpr &f = sec.items[j];
        if (f.has_head("not"))
          unsupported(f, "negative initial facts are not supported");
        Atom a = parse_atom(f);
        check_fact(a, f);
        if (std::find(prob.init.begin(), prob.init.end(), a) == prob.init.end())
          prob.init.push_back(std::move(a));
      }
    } else if (key == ":goal") {
      prob.goal = parse_conjunction(sec.at(1));
      dedupe(prob.goal);
      for (const auto &g : prob.goal)
        check_fact(g, sec);
    } else {
      unsupported(sec, "unsupported problem section " + key);
    }
  }
  if (prob.domain_name.empty())
    fail(d, "problem does not name its domain");
  return prob;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Domain load_domain(const std::string &path) {
  return parse_domain(read_file(path));
}

Problem load_problem(const std::string &path, const Domain &domain) {
  return parse_problem(read_file(path), domain);
}

} // namespace macroplan
