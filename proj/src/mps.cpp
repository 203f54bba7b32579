#include "skm/problems.hpp"

#include <cctype>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace skm {

namespace {

enum class Section { None, Name, Rows, Columns, Rhs, Bounds, End };

enum class RowType { Objective, Free, Equal, Less, Greater };

struct RowInfo {
  RowType type;
  std::size_t index;  // position within its group (equalities or inequalities)
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

class MpsReader {
public:
  LpInstance read(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '*') continue;
      const auto fields = split(line);
      if (fields.empty()) continue;

      if (!std::isspace(static_cast<unsigned char>(line.front()))) {
        start_section(fields);
        if (section_ == Section::End) break;
        continue;
      }
      switch (section_) {
        case Section::Rows: row_entry(fields); break;
        case Section::Columns: column_entry(fields); break;
        case Section::Rhs: rhs_entry(fields); break;
        case Section::Bounds: bound_entry(fields); break;
        default: fail("data line outside of a section");
      }
    }
    if (section_ != Section::End) fail("missing ENDATA");
    return assemble();
  }

private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }

  void start_section(const std::vector<std::string>& f) {
    const std::string& key = f.front();
    if (key == "NAME") {
      name_ = f.size() > 1 ? f[1] : std::string{};
      section_ = Section::Name;
    } else if (key == "ROWS") {
      section_ = Section::Rows;
    } else if (key == "COLUMNS") {
      if (rows_.empty()) fail("COLUMNS before ROWS");
      section_ = Section::Columns;
    } else if (key == "RHS") {
      require_columns();
      section_ = Section::Rhs;
    } else if (key == "BOUNDS") {
      require_columns();
      section_ = Section::Bounds;
    } else if (key == "ENDATA") {
      require_columns();
      section_ = Section::End;
    } else if (key == "RANGES") {
      fail("unsupported section RANGES");
    } else {
      fail("unknown section '" + key + "'");
    }
  }

  void require_columns() {
    if (columns_.empty()) fail("empty COLUMNS section");
  }

  void row_entry(const std::vector<std::string>& f) {
    if (f.size() != 2) fail("ROWS entry needs a type and a name");
    const std::string& type = f[0];
    const std::string& name = f[1];
    if (rows_.count(name)) fail("duplicate row '" + name + "'");
    RowInfo info{};
    if (type == "N") {
      info.type = objective_.empty() ? RowType::Objective : RowType::Free;
      if (objective_.empty()) objective_ = name;
    } else if (type == "E") {
      info = {RowType::Equal, eq_names_.size()};
      eq_names_.push_back(name);
    } else if (type == "L" || type == "G") {
      info = {type == "L" ? RowType::Less : RowType::Greater, ineq_names_.size()};
      ineq_names_.push_back(name);
    } else {
      fail("unknown row type '" + type + "'");
    }
    rows_.emplace(name, info);
  }

  const RowInfo& row(const std::string& name) const {
    const auto it = rows_.find(name);
    if (it == rows_.end()) fail("unknown row '" + name + "'");
    return it->second;
  }

  double number(const std::string& text) const {
    try {
      return parse_double(text);
    } catch (const std::invalid_argument&) {
      fail("invalid number '" + text + "'");
    }
  }

  void column_entry(const std::vector<std::string>& f) {
    if (f.size() >= 2 && f[1] == "'MARKER'") fail("integer markers are not supported");
    if (f.size() != 3 && f.size() != 5) fail("COLUMNS entry needs a column and one or two row/value pairs");
    const std::string& col = f[0];
    auto [it, inserted] = column_index_.emplace(col, columns_.size());
    if (inserted) {
      columns_.push_back(col);
    } else if (it->second != columns_.size() - 1) {
      fail("column '" + col + "' is not contiguous");
    }
    const std::size_t j = it->second;
    for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
      const RowInfo& info = row(f[k]);
      if (!seen_.insert({f[k], j}).second) {
        fail("duplicate entry for column '" + col + "' in row '" + f[k] + "'");
      }
      entries_.push_back({info, j, number(f[k + 1])});
    }
  }

  void rhs_entry(const std::vector<std::string>& f) {
    // Optional set name: two or four fields mean it was omitted.
    const std::size_t first = (f.size() % 2 == 1) ? 1 : 0;
    if (f.size() - first != 2 && f.size() - first != 4) fail("malformed RHS entry");
    for (std::size_t k = first; k + 1 < f.size(); k += 2) {
      const RowInfo& info = row(f[k]);
      const double v = number(f[k + 1]);
      if (info.type == RowType::Objective) {
        objective_constant_ = -v;
      } else if (info.type == RowType::Equal) {
        eq_rhs_[info.index] = v;
      } else if (info.type != RowType::Free) {
        ineq_rhs_[info.index] = v;
      }
    }
  }

  void bound_entry(const std::vector<std::string>& f) {
    const std::string& type = f[0];
    const bool valueless = type == "FR" || type == "MI" || type == "PL";
    // TYPE [SET] COLUMN [VALUE]; the set name is optional.
    const std::size_t base = valueless ? 2 : 3;
    if (f.size() != base && f.size() != base + 1) fail("malformed BOUNDS entry");
    const std::size_t col_pos = f.size() == base ? 1 : 2;
    const auto it = column_index_.find(f[col_pos]);
    if (it == column_index_.end()) fail("unknown column '" + f[col_pos] + "' in BOUNDS");
    auto& [lo, hi] = bounds_.try_emplace(it->second, 0.0, kInfinity).first->second;
    const auto value = [&]() { return number(f[col_pos + 1]); };
    if (type == "UP") {
      hi = value();
      if (hi < 0.0 && lo == 0.0) lo = -kInfinity;
    } else if (type == "LO") {
      lo = value();
    } else if (type == "FX") {
      lo = hi = value();
    } else if (type == "FR") {
      lo = -kInfinity;
      hi = kInfinity;
    } else if (type == "MI") {
      lo = -kInfinity;
    } else if (type == "PL") {
      hi = kInfinity;
    } else {
      fail("unsupported bound type '" + type + "'");
    }
  }

  LpInstance assemble() {
    LpInstance lp;
    lp.name = name_;
    lp.column_names = columns_;
    lp.equality_names = eq_names_;
    const auto n = static_cast<Index>(columns_.size());
    lp.a_eq = DenseMatrix::Zero(static_cast<Index>(eq_names_.size()), n);
    lp.b = Vector::Zero(static_cast<Index>(eq_names_.size()));
    lp.c = Vector::Zero(n);
    lp.objective_constant = objective_constant_;
    lp.lower = Vector::Zero(n);
    lp.upper = Vector::Constant(n, kInfinity);
    lp.inequalities.resize(ineq_names_.size());
    for (std::size_t i = 0; i < ineq_names_.size(); ++i) {
      lp.inequalities[i].name = ineq_names_[i];
      lp.inequalities[i].coefficients = Vector::Zero(n);
    }

    for (const auto& e : entries_) {
      const auto j = static_cast<Index>(e.column);
      switch (e.row.type) {
        case RowType::Objective: lp.c(j) = e.value; break;
        case RowType::Free: break;
        case RowType::Equal: lp.a_eq(static_cast<Index>(e.row.index), j) = e.value; break;
        case RowType::Less:
        case RowType::Greater: lp.inequalities[e.row.index].coefficients(j) = e.value; break;
      }
    }
    for (const auto& [i, v] : eq_rhs_) lp.b(static_cast<Index>(i)) = v;
    for (const auto& [i, v] : ineq_rhs_) lp.inequalities[i].rhs = v;
    for (const auto& [name, info] : rows_) {
      if (info.type == RowType::Greater) lp.inequalities[info.index].sense = RowSense::GreaterEqual;
    }
    for (const auto& [j, b] : bounds_) {
      lp.lower(static_cast<Index>(j)) = b.first;
      lp.upper(static_cast<Index>(j)) = b.second;
      if (b.first > b.second) throw ParseError("lower bound exceeds upper bound for '" + columns_[j] + "'", line_);
    }
    return lp;
  }

  struct Entry {
    RowInfo row;
    std::size_t column;
    double value;
  };

  Section section_ = Section::None;
  std::size_t line_ = 0;
  std::string name_;
  std::string objective_;
  std::unordered_map<std::string, RowInfo> rows_;
  std::vector<std::string> eq_names_;
  std::vector<std::string> ineq_names_;
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> column_index_;
  std::set<std::pair<std::string, std::size_t>> seen_;
  std::vector<Entry> entries_;
  std::map<std::size_t, double> eq_rhs_;
  std::map<std::size_t, double> ineq_rhs_;
  std::map<std::size_t, std::pair<double, double>> bounds_;
  double objective_constant_ = 0.0;
};

}  // namespace

LpInstance parse_mps(std::istream& in) { return MpsReader().read(in); }

LpInstance parse_mps_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_mps(in);
}

}  // namespace skm
