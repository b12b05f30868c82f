#include "deropt/model/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <vector>

#include "deropt/core/error.hpp"

namespace deropt::model {

namespace {

std::string encode(std::string name) {
  std::replace(name.begin(), name.end(), '[', '(');
  std::replace(name.begin(), name.end(), ']', ')');
  return name;
}

std::string decode(std::string name) {
  std::replace(name.begin(), name.end(), '(', '[');
  std::replace(name.begin(), name.end(), ')', ']');
  return name;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::ostringstream& os, const MilpModel& m,
                 const std::vector<std::pair<int, double>>& terms) {
  if (terms.empty()) {
    os << " 0 " << encode(m.variables().empty() ? "x" : m.variables()[0].name);
    return;
  }
  for (const auto& [id, coef] : terms) {
    os << (coef < 0 ? " - " : " + ") << num(std::abs(coef)) << ' '
       << encode(m.variables()[id].name);
  }
}

[[noreturn]] void fail(const std::string& msg, int line) {
  throw Error(ErrorCode::InvalidInput, "LP line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '<' || c == '>' || c == '=') {
      flush();
      std::string op(1, c);
      if (i + 1 < line.size() && (line[i + 1] == '=' || line[i + 1] == '<' || line[i + 1] == '>')) {
        op += line[++i];
      }
      out.push_back(op);
    } else if (c == ':' && out.empty()) {
      cur += c;
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

bool parse_number(const std::string& s, double& v) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity") {
    v = kInf;
    return true;
  }
  if (t == "-inf" || t == "-infinity") {
    v = -kInf;
    return true;
  }
  const char* b = s.data() + (s[0] == '+' ? 1 : 0);
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e;
}

Sense parse_sense(const std::string& op, int line) {
  if (op == "<=" || op == "=<" || op == "<") return Sense::LessEqual;
  if (op == ">=" || op == "=>" || op == ">") return Sense::GreaterEqual;
  if (op == "=") return Sense::Equal;
  fail("expected a comparison, got '" + op + "'", line);
}

bool is_sense(const std::string& t) {
  return t == "<=" || t == "=<" || t == "<" || t == ">=" || t == "=>" || t == ">" || t == "=";
}

enum class Section { None, Objective, Rows, Bounds, Binaries, Done };

struct Term {
  std::string name;  // empty for a constant
  double coef = 0.0;
};

// Parses tokens [begin, end) as a sum of signed terms.
std::vector<Term> parse_expr(const std::vector<std::string>& t, std::size_t begin,
                             std::size_t end, int line) {
  std::vector<Term> out;
  double sign = 1.0;
  std::optional<double> coef;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& tok = t[i];
    if (tok == "+") continue;
    if (tok == "-") {
      sign = -sign;
      continue;
    }
    double v;
    if (parse_number(tok, v)) {
      if (coef) fail("two numbers in a row", line);
      coef = v;
      continue;
    }
    out.push_back({tok, sign * coef.value_or(1.0)});
    sign = 1.0;
    coef.reset();
  }
  if (coef) out.push_back({"", sign * *coef});
  return out;
}

}  // namespace

std::string write_lp(const MilpModel& m) {
  std::ostringstream os;
  os << "\\ deropt model: " << m.num_vars() << " variables, " << m.num_constraints()
     << " rows\n";
  os << "Minimize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.objective()[j] != 0.0) obj.emplace_back(j, m.objective()[j]);
  }
  write_terms(os, m, obj);
  if (m.objective_offset() != 0.0) {
    os << (m.objective_offset() < 0 ? " - " : " + ") << num(std::abs(m.objective_offset()));
  }
  os << "\nSubject To\n";
  std::set<std::string> used;
  for (int i = 0; i < m.num_constraints(); ++i) {
    const auto& c = m.constraints()[i];
    std::string name = encode(c.name);
    if (name.empty() || !used.insert(name).second) {
      name = "c" + std::to_string(i);
      used.insert(name);
    }
    os << ' ' << name << ':';
    write_terms(os, m, c.terms);
    os << (c.sense == Sense::LessEqual ? " <= " : c.sense == Sense::GreaterEqual ? " >= " : " = ")
       << num(c.rhs) << '\n';
  }
  os << "Bounds\n";
  for (const auto& v : m.variables()) {
    const std::string n = encode(v.name);
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      os << ' ' << n << " free\n";
    } else if (v.lower == v.upper) {
      os << ' ' << n << " = " << num(v.lower) << '\n';
    } else {
      os << ' ' << num(v.lower) << " <= " << n << " <= " << num(v.upper) << '\n';
    }
  }
  bool any_binary = false;
  for (const auto& v : m.variables()) {
    if (v.integrality != Integrality::Binary) continue;
    if (!any_binary) os << "Binaries\n";
    any_binary = true;
    os << ' ' << encode(v.name) << '\n';
  }
  os << "End\n";
  return os.str();
}

MilpModel read_lp(std::string_view text) {
  struct Row {
    std::string name;
    std::vector<Term> lhs;
    Sense sense;
    double rhs;
  };
  struct Bound {
    std::string name;
    std::optional<double> lower, upper;
    bool free = false;
  };
  std::vector<Term> objective;
  std::vector<Row> rows;
  std::vector<Bound> bounds;
  std::vector<std::string> binaries;

  Section section = Section::None;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto c = raw.find('\\'); c != std::string::npos) raw.erase(c);
    auto t = tokens(raw);
    if (t.empty()) continue;
    std::string head;
    for (const auto& tok : t) {
      if (!head.empty()) head += ' ';
      head += tok;
    }
    std::string lower = head;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "minimize" || lower == "minimum" || lower == "min") {
      section = Section::Objective;
      continue;
    }
    if (lower == "maximize" || lower == "maximum" || lower == "max") {
      fail("only minimization is supported", line_no);
    }
    if (lower == "subject to" || lower == "such that" || lower == "st" || lower == "s.t.") {
      section = Section::Rows;
      continue;
    }
    if (lower == "bounds" || lower == "bound") {
      section = Section::Bounds;
      continue;
    }
    if (lower == "binaries" || lower == "binary" || lower == "bin") {
      section = Section::Binaries;
      continue;
    }
    if (lower == "general" || lower == "generals" || lower == "gen") {
      fail("general integers are not supported", line_no);
    }
    if (lower == "end") {
      section = Section::Done;
      continue;
    }

    std::size_t start = 0;
    std::string label;
    if (!t.empty() && t[0].size() > 1 && t[0].back() == ':') {
      label = decode(t[0].substr(0, t[0].size() - 1));
      start = 1;
    }
    switch (section) {
      case Section::Objective: {
        auto terms = parse_expr(t, start, t.size(), line_no);
        objective.insert(objective.end(), terms.begin(), terms.end());
        break;
      }
      case Section::Rows: {
        auto op = std::find_if(t.begin() + start, t.end(), is_sense);
        if (op == t.end() || op + 2 != t.end()) fail("row needs 'expr op number'", line_no);
        double rhs;
        if (!parse_number(*(op + 1), rhs)) fail("bad right-hand side", line_no);
        auto lhs = parse_expr(t, start, op - t.begin(), line_no);
        rows.push_back({label, std::move(lhs), parse_sense(*op, line_no), rhs});
        break;
      }
      case Section::Bounds: {
        Bound b;
        double v;
        if (t.size() == 2 && (t[1] == "free" || t[1] == "Free" || t[1] == "FREE")) {
          b.name = t[0];
          b.free = true;
        } else if (t.size() == 5 && parse_number(t[0], v)) {
          double u;
          if (!parse_number(t[4], u)) fail("bad upper bound", line_no);
          b.name = t[2];
          b.lower = v;
          b.upper = u;
        } else if (t.size() == 3 && parse_number(t[2], v)) {
          b.name = t[0];
          const Sense s = parse_sense(t[1], line_no);
          if (s != Sense::GreaterEqual) b.upper = v;
          if (s != Sense::LessEqual) b.lower = v;
        } else if (t.size() == 3 && parse_number(t[0], v)) {
          b.name = t[2];
          const Sense s = parse_sense(t[1], line_no);
          if (s != Sense::GreaterEqual) b.lower = v;
          if (s != Sense::LessEqual) b.upper = v;
        } else {
          fail("unrecognized bound", line_no);
        }
        bounds.push_back(std::move(b));
        break;
      }
      case Section::Binaries:
        for (std::size_t i = start; i < t.size(); ++i) binaries.push_back(t[i]);
        break;
      case Section::None: fail("text before the objective section", line_no);
      case Section::Done: fail("text after End", line_no);
    }
  }

  MilpModel m;
  std::set<std::string> bin_set(binaries.begin(), binaries.end());
  auto ensure = [&](const std::string& encoded) {
    const std::string name = decode(encoded);
    if (auto v = m.find(name)) return *v;
    if (bin_set.count(encoded)) return m.add_binary(name);
    return m.add_var(name);
  };
  for (const auto& b : bounds) {
    Var v = ensure(b.name);
    const auto& var = m.variables()[v.id];
    double lo = var.lower, hi = var.upper;
    if (b.free) {
      lo = -kInf;
      hi = kInf;
    }
    if (b.lower) lo = *b.lower;
    if (b.upper) hi = *b.upper;
    m.set_bounds(v, lo, hi);
  }
  for (const auto& name : binaries) ensure(name);
  LinearExpr obj;
  for (const auto& term : objective) {
    if (term.name.empty()) {
      obj += LinearExpr(term.coef);
    } else {
      obj.add(ensure(term.name), term.coef);
    }
  }
  for (const auto& row : rows) {
    LinearExpr lhs;
    for (const auto& term : row.lhs) {
      if (term.name.empty()) {
        lhs += LinearExpr(term.coef);
      } else {
        lhs.add(ensure(term.name), term.coef);
      }
    }
    m.add_constraint(lhs, row.sense, row.rhs, row.name);
  }
  m.add_objective(obj);
  return m;
}

}  // namespace deropt::model
