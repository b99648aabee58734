#include "macroplan/macro.hpp"
#include "macroplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace macroplan {

namespace {

void write_typed(std::ostream &out, const std::vector<TypedVar> &vars,
                 bool typed) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i)
      out << ' ';
    out << vars[i].name;
    if (typed)
      out << " - " << vars[i].type;
  }
}

template <typename Atoms>
void write_atoms(std::ostream &out, const Atoms &atoms, bool negate,
                 const char *indent) {
  for (const auto &a : atoms) {
    out << indent;
    if (negate)
      out << "(not " << to_string(a) << ")";
    else
      out << to_string(a);
    out << '\n';
  }
}

template <typename Atoms>
void write_action(std::ostream &out, const std::string &name,
                  const std::vector<TypedVar> &params, const Atoms &pre,
                  const Atoms &add, const Atoms &del, bool typed) {
  out << "  (:action " << name << "\n   :parameters (";
  write_typed(out, params, typed);
  out << ")\n   :precondition\n    (and\n";
  write_atoms(out, pre, false, "      ");
  out << "    )\n   :effect\n    (and\n";
  write_atoms(out, del, true, "      ");
  write_atoms(out, add, false, "      ");
  out << "    )\n  )\n";
}

} // namespace

std::string macro_action_name(std::span<const std::string> ops) {
  std::string name;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i)
      name += "--";
    name += ops[i];
  }
  return name;
}

std::vector<std::string> split_macro_name(const Domain &domain,
                                          std::string_view name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = name.find("--", start);
    parts.emplace_back(name.substr(start, pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 2;
  }
  // Trailing variant number.
  if (parts.size() > 2 && !parts.back().empty() &&
      std::all_of(parts.back().begin(), parts.back().end(),
                  [](unsigned char c) { return std::isdigit(c); }))
    parts.pop_back();
  if (parts.size() < 2)
    return {};
  for (const auto &p : parts)
    if (!domain.find_operator(p))
      return {};
  return parts;
}

std::string write_domain(const Domain &domain,
                         std::span<const MacroOperator> macros) {
  const bool typed = domain.types.types().size() > 1;
  std::ostringstream out;
  out << "(define (domain " << domain.name << ")\n";
  out << "  (:requirements :strips" << (typed ? " :typing" : "") << ")\n";
  if (typed) {
    out << "  (:types";
    // Group by parent so every declaration reads `a b - parent`.
    std::vector<std::string> parents;
    for (const auto &t : domain.types.types()) {
      if (t == TypeHierarchy::kRoot)
        continue;
      auto p = domain.types.parent(t);
      if (std::find(parents.begin(), parents.end(), p) == parents.end())
        parents.push_back(p);
    }
    for (const auto &p : parents) {
      out << "\n   ";
      for (const auto &t : domain.types.types())
        if (t != TypeHierarchy::kRoot && domain.types.parent(t) == p)
          out << ' ' << t;
      out << " - " << p;
    }
    out << ")\n";
  }
  if (!domain.constants.empty()) {
    out << "  (:constants ";
    write_typed(out, domain.constants, typed);
    out << ")\n";
  }
  out << "  (:predicates\n";
  std::set<std::string> written;
  for (const auto &p : domain.predicates) {
    if (!written.insert(p.name).second)
      continue;
    out << "    (" << p.name;
    if (!p.params.empty())
      out << ' ';
    write_typed(out, p.params, typed);
    out << ")\n";
  }
  out << "  )\n";
  for (const auto &op : domain.operators)
    write_action(out, op.name, op.params, op.pre, op.add, op.del, typed);
  for (const auto &m : macros) {
    if (!m.compiled)
      throw std::invalid_argument("macro " + m.name() +
                                  " has no compiled body");
    if (domain.find_operator(m.name()))
      throw PddlError("macro name '" + m.name() +
                      "' collides with an existing operator");
    write_action(out, m.name(), m.vars, m.compiled->pre, m.compiled->add,
                 m.compiled->del, typed);
  }
  out << ")\n";
  return out.str();
}

std::string write_problem(const Problem &problem) {
  std::ostringstream out;
  out << "(define (problem " << problem.name << ")\n";
  out << "  (:domain " << problem.domain_name << ")\n";
  out << "  (:objects";
  for (const auto &o : problem.objects)
    out << "\n    " << o.name << " - " << o.type;
  out << ")\n  (:init";
  for (const auto &a : problem.init)
    out << "\n    " << to_string(a);
  out << ")\n  (:goal (and";
  for (const auto &g : problem.goal)
    out << "\n    " << to_string(g);
  out << "))\n)\n";
  return out.str();
}

// ---------------------------------------------------------------- flatten

namespace {

template <typename F>
void for_each_product(const std::vector<std::vector<std::string>> &choices,
                      F &&f) {
  std::vector<std::size_t> idx(choices.size(), 0);
  for (const auto &c : choices)
    if (c.empty())
      return;
  for (;;) {
    std::vector<std::string> pick;
    pick.reserve(choices.size());
    for (std::size_t i = 0; i < choices.size(); ++i)
      pick.push_back(choices[i][idx[i]]);
    f(pick);
    std::size_t k = choices.size();
    while (k > 0) {
      --k;
      if (++idx[k] < choices[k].size())
        break;
      idx[k] = 0;
      if (k == 0)
        return;
    }
    if (choices.empty())
      return;
  }
}

} // namespace

Domain flatten_types(const Domain &domain) {
  Domain flat;
  flat.name = domain.name;
  flat.types = domain.types;
  flat.constants = domain.constants;
  flat.flattened = true;

  for (const auto &p : domain.predicates) {
    std::vector<std::vector<std::string>> choices;
    for (const auto &v : p.params)
      choices.push_back(domain.types.atomic_subtypes(v.type));
    for_each_product(choices, [&](const std::vector<std::string> &pick) {
      Predicate s{p.name, p.params};
      for (std::size_t i = 0; i < pick.size(); ++i)
        s.params[i].type = pick[i];
      flat.predicates.push_back(std::move(s));
    });
  }

  for (const auto &op : domain.operators) {
    std::vector<std::vector<std::string>> choices;
    bool already_flat = true;
    for (const auto &v : op.params) {
      choices.push_back(domain.types.atomic_subtypes(v.type));
      already_flat = already_flat && domain.types.is_atomic(v.type);
    }
    for_each_product(choices, [&](const std::vector<std::string> &pick) {
      Operator s = op;
      std::string suffix;
      for (std::size_t i = 0; i < pick.size(); ++i) {
        if (!domain.types.is_atomic(op.params[i].type))
          suffix += "_" + pick[i];
        s.params[i].type = pick[i];
      }
      if (!already_flat) {
        s.name = op.name + suffix;
        while (domain.find_operator(s.name) || flat.find_operator(s.name))
          s.name += "_";
        flat.provenance[s.name] = domain.original_operator_name(op.name);
      }
      flat.operators.push_back(std::move(s));
    });
  }
  return flat;
}

// ---------------------------------------------------------------- equality

bool equivalent(const Operator &a, const Operator &b) {
  if (a.name != b.name || a.params.size() != b.params.size())
    return false;
  VarMap rename;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].type != b.params[i].type)
      return false;
    rename[a.params[i].name] = b.params[i].name;
  }
  auto same = [&](const std::vector<Atom> &x, const std::vector<Atom> &y) {
    return map_atoms(x, rename) == std::set<Atom>(y.begin(), y.end());
  };
  return same(a.pre, b.pre) && same(a.add, b.add) && same(a.del, b.del);
}

bool equivalent(const Domain &a, const Domain &b) {
  if (a.types.types().size() != b.types.types().size())
    return false;
  for (const auto &t : a.types.types())
    if (!b.types.contains(t) || a.types.parent(t) != b.types.parent(t))
      return false;
  if (a.name != b.name ||
      a.constants != b.constants || a.predicates.size() != b.predicates.size() ||
      a.operators.size() != b.operators.size())
    return false;
  for (const auto &p : a.predicates) {
    const Predicate *q = b.find_predicate(p.name);
    if (!q || q->params.size() != p.params.size())
      return false;
    for (std::size_t i = 0; i < p.params.size(); ++i)
      if (p.params[i].type != q->params[i].type)
        return false;
  }
  for (std::size_t i = 0; i < a.operators.size(); ++i)
    if (!equivalent(a.operators[i], b.operators[i]))
      return false;
  return true;
}

} // namespace macroplan
