#include "macroplan/pipeline.hpp"

#include "macroplan/sexpr.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace macroplan {

std::vector<MacroOperator> MacroFile::macros() const {
  std::vector<MacroOperator> out;
  for (const auto &e : entries) out.push_back(e.macro);
  return out;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const Operator &require_operator(const Domain &domain, const std::string &name) {
  const Operator *op = domain.find_operator(name);
  if (!op) throw MacroFileError("unknown operator " + name);
  return *op;
}

double parse_number(const SExpr &e) {
  if (!e.is_symbol()) throw MacroFileError("expected a number");
  char *end = nullptr;
  double v = std::strtod(e.symbol.c_str(), &end);
  if (end == e.symbol.c_str() || *end != '\0')
    throw MacroFileError("bad number '" + e.symbol + "'");
  return v;
}

/// Keyword arguments of `(:head :k v :k v ...)` starting at `first`.
std::map<std::string, const SExpr *> keywords(const SExpr &e, std::size_t first) {
  std::map<std::string, const SExpr *> out;
  if ((e.size() - first) % 2 != 0) throw MacroFileError("unbalanced keyword list");
  for (std::size_t i = first; i < e.size(); i += 2) {
    if (!e.at(i).is_symbol() || e.at(i).symbol.empty() || e.at(i).symbol[0] != ':')
      throw MacroFileError("expected a keyword");
    out[e.at(i).symbol] = &e.at(i + 1);
  }
  return out;
}

const SExpr &need(const std::map<std::string, const SExpr *> &kw, const std::string &k) {
  auto it = kw.find(k);
  if (it == kw.end()) throw MacroFileError("missing " + k);
  return *it->second;
}

} // namespace

std::string write_macro_file(const MacroFile &file, const Domain &domain) {
  std::ostringstream os;
  os << "(:macro-file :domain " << file.domain << " :threshold "
     << fixed6(file.threshold) << ")\n";
  os << "(:config";
  for (const auto &[k, v] : file.config) os << " :" << k << " " << v;
  os << ")\n";
  for (const auto &e : file.entries) {
    const MacroOperator &m = e.macro;
    os << "(:macro (";
    for (std::size_t i = 0; i < m.ops.size(); ++i) os << (i ? " " : "") << m.ops[i];
    os << ") :vars (";
    for (std::size_t i = 0; i < m.vars.size(); ++i)
      os << (i ? " " : "") << m.vars[i].name << " - " << m.vars[i].type;
    os << ") :map (";
    bool first = true;
    for (std::size_t i = 0; i < m.ops.size(); ++i) {
      const Operator &op = require_operator(domain, m.ops[i]);
      for (std::size_t j = 0; j < op.params.size(); ++j) {
        os << (first ? "" : " ") << "(op" << i + 1 << "." << op.params[j].name
           << " -> " << m.vars.at(m.bindings.at(i).at(j)).name << ")";
        first = false;
      }
    }
    os << ") :weight " << fixed6(e.weight) << " :method " << e.method << ")\n";
  }
  return os.str();
}

MacroFile parse_macro_file(std::string_view text, const Domain &domain) {
  MacroFile file;
  std::vector<SExpr> exprs;
  try {
    exprs = read_sexprs(text);
  } catch (const SyntaxError &e) {
    throw MacroFileError(std::string("macro file: ") + e.what());
  }
  bool header = false;
  for (const auto &e : exprs) {
    if (e.has_head(":macro-file")) {
      auto kw = keywords(e, 1);
      file.domain = need(kw, ":domain").symbol;
      file.threshold = parse_number(need(kw, ":threshold"));
      header = true;
    } else if (e.has_head(":config")) {
      if ((e.size() - 1) % 2 != 0) throw MacroFileError("unbalanced config");
      for (std::size_t i = 1; i < e.size(); i += 2)
        file.config.emplace_back(e.at(i).symbol.substr(1), e.at(i + 1).symbol);
    } else if (e.has_head(":macro")) {
      if (e.size() < 2 || !e.at(1).is_list) throw MacroFileError("missing operator list");
      auto kw = keywords(e, 2);
      MacroFileEntry entry;
      MacroOperator &m = entry.macro;
      for (const auto &op : e.at(1).items) m.ops.push_back(op.symbol);
      const SExpr &vars = need(kw, ":vars");
      for (std::size_t i = 0; i < vars.size(); i += 3) {
        if (i + 2 >= vars.size() || !vars.at(i + 1).is_symbol("-"))
          throw MacroFileError("malformed :vars");
        if (!domain.types.contains(vars.at(i + 2).symbol))
          throw MacroFileError("unknown type " + vars.at(i + 2).symbol);
        m.vars.push_back({vars.at(i).symbol, vars.at(i + 2).symbol});
      }
      auto var_index = [&](const std::string &name) {
        for (std::size_t i = 0; i < m.vars.size(); ++i)
          if (m.vars[i].name == name) return i;
        throw MacroFileError("unknown macro variable " + name);
      };
      std::map<std::string, std::size_t> mapping;
      for (const auto &pair : need(kw, ":map").items) {
        if (pair.size() != 3 || !pair.at(1).is_symbol("->"))
          throw MacroFileError("malformed :map entry");
        mapping[pair.at(0).symbol] = var_index(pair.at(2).symbol);
      }
      for (std::size_t i = 0; i < m.ops.size(); ++i) {
        const Operator &op = require_operator(domain, m.ops[i]);
        std::vector<std::size_t> b;
        for (const auto &p : op.params) {
          auto it = mapping.find("op" + std::to_string(i + 1) + "." + p.name);
          if (it == mapping.end())
            throw MacroFileError("parameter " + p.name + " of " + op.name +
                                 " is not mapped");
          if (!domain.types.is_subtype(m.vars[it->second].type, p.type))
            throw MacroFileError("type mismatch for " + p.name + " of " + op.name);
          b.push_back(it->second);
        }
        m.bindings.push_back(std::move(b));
      }
      entry.weight = parse_number(need(kw, ":weight"));
      entry.method = need(kw, ":method").symbol;
      if (entry.method == "caed") m = compile_macro(domain, m);
      file.entries.push_back(std::move(entry));
    } else {
      throw MacroFileError("unexpected entry in macro file");
    }
  }
  if (!header) throw MacroFileError("missing (:macro-file ...) header");
  if (file.domain != domain.name)
    throw MacroFileError("macro file is for domain " + file.domain + ", not " +
                         domain.name);
  return file;
}

MacroFile load_macro_file(const std::string &path, const Domain &domain) {
  return parse_macro_file(read_file(path), domain);
}

} // namespace macroplan
