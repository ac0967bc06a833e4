#include "draftiv/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "draftiv/csv.hpp"
#include "draftiv/stats.hpp"

namespace draftiv {

namespace {

NumericSummary summarize(const std::string& name, const std::vector<double>& raw) {
  NumericSummary s;
  s.column = name;
  std::vector<double> vals;
  vals.reserve(raw.size());
  double sum = 0;
  for (double v : raw) {
    if (std::isnan(v)) continue;
    vals.push_back(v);
    sum += v;
  }
  s.n = static_cast<long>(vals.size());
  if (vals.empty()) return s;
  s.mean = sum / static_cast<double>(vals.size());
  s.min = quantile_type7(vals, 0.0);
  s.q1 = quantile_type7(vals, 0.25);
  s.median = quantile_type7(vals, 0.5);
  s.q3 = quantile_type7(vals, 0.75);
  s.max = quantile_type7(vals, 1.0);
  return s;
}

}  // namespace

std::vector<NumericSummary> summary_stats(const Panel& panel) {
  struct Col {
    const char* name;
    double (*get)(const PanelRow&);
  };
  static const Col cols[] = {
      {"event_year", [](const PanelRow& r) { return static_cast<double>(r.event_year); }},
      {"age", [](const PanelRow& r) { return static_cast<double>(r.age); }},
      {"age_sq", [](const PanelRow& r) { return static_cast<double>(r.age_sq); }},
      {"male", [](const PanelRow& r) { return r.male ? 1.0 : 0.0; }},
      {"swim_out_s", [](const PanelRow& r) { return r.swim_out_s; }},
      {"total_s", [](const PanelRow& r) { return r.total_s; }},
      {"rank", [](const PanelRow& r) { return r.rank; }},
      {"group_size",
       [](const PanelRow& r) {
         return r.group_size > 0 ? static_cast<double>(r.group_size) : kMissing;
       }},
      {"position",
       [](const PanelRow& r) {
         return r.position > 0 ? static_cast<double>(r.position) : kMissing;
       }},
  };
  std::vector<NumericSummary> out;
  std::vector<double> buf(panel.size());
  for (const Col& c : cols) {
    for (size_t i = 0; i < panel.size(); ++i) buf[i] = c.get(panel[i]);
    out.push_back(summarize(c.name, buf));
  }
  return out;
}

std::vector<BalanceRow> balance_by_category_period(const Panel& panel) {
  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (const auto& r : panel) {
    if (std::isnan(r.swim_out_s)) continue;
    cells[{static_cast<int>(r.category), static_cast<int>(r.period)}].push_back(
        r.swim_out_s);
  }
  std::vector<BalanceRow> out;
  for (const auto& [key, vals] : cells) {
    BalanceRow row;
    row.category = static_cast<EventCategory>(key.first);
    row.period = static_cast<Period>(key.second);
    row.n = static_cast<long>(vals.size());
    double sum = 0;
    for (double v : vals) sum += v;
    row.mean_swim = sum / static_cast<double>(vals.size());
    double ss = 0;
    for (double v : vals) ss += (v - row.mean_swim) * (v - row.mean_swim);
    row.sd_swim = vals.size() > 1
                      ? std::sqrt(ss / static_cast<double>(vals.size() - 1))
                      : 0.0;
    out.push_back(row);
  }
  return out;
}

void write_summary_csv(const std::string& path,
                       const std::vector<NumericSummary>& rows,
                       const std::string& comment) {
  CsvTable t;
  t.header = {"column", "n", "min", "q1", "median", "mean", "q3", "max"};
  for (const auto& s : rows) {
    t.rows.push_back({s.column, std::to_string(s.n), format_double(s.min),
                      format_double(s.q1), format_double(s.median),
                      format_double(s.mean), format_double(s.q3),
                      format_double(s.max)});
  }
  write_csv(path, t, ',', comment);
}

void write_balance_csv(const std::string& path, const std::vector<BalanceRow>& rows,
                       const std::string& comment) {
  CsvTable t;
  t.header = {"category", "period", "mean_swim_s", "sd_swim_s", "n"};
  for (const auto& r : rows) {
    t.rows.push_back({to_string(r.category), to_string(r.period),
                      format_double(r.mean_swim), format_double(r.sd_swim),
                      std::to_string(r.n)});
  }
  write_csv(path, t, ',', comment);
}

NamedResult named_ols(const std::string& name, const RegressionResult& r,
                      const std::string& formula_text) {
  NamedResult n;
  n.name = name;
  n.reg = r;
  n.formula_text = formula_text;
  return n;
}

NamedResult named_iv(const std::string& name, const IVResult& r,
                     const std::string& formula_text) {
  NamedResult n;
  n.name = name;
  n.is_iv = true;
  n.reg = r.second;
  n.first = r.first;
  n.wu_hausman_p = r.wu_hausman_p;
  n.wu_hausman_degenerate = r.wu_hausman_degenerate;
  n.formula_text = formula_text;
  return n;
}

std::string star_marker(double pval, StarConvention convention) {
  if (std::isnan(pval)) return "";
  if (convention == StarConvention::Coarse) {
    if (pval < 0.01) return "***";
    if (pval < 0.05) return "**";
    if (pval < 0.1) return "*";
  } else {
    if (pval < 0.001) return "***";
    if (pval < 0.01) return "**";
    if (pval < 0.05) return "*";
  }
  return "";
}

namespace {

std::string fixed3(double v) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fixed1(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string coef_cell(const NamedResult& r, const std::string& coef,
                      StarConvention stars) {
  int idx = r.reg.coefs.find(coef);
  if (idx < 0) return "";
  std::string cell = fixed3(r.reg.coefs.coef[idx]);
  cell += star_marker(r.reg.coefs.pval[idx], stars);
  std::string se = fixed3(r.reg.coefs.se[idx]);
  cell += " (" + (se.empty() ? "NA" : se) + ")";
  return cell;
}

struct Grid {
  std::vector<std::string> col_names;
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
};

void render_csv(const Grid& g, const TableLayout& layout, std::ostringstream& os) {
  if (!layout.title.empty()) os << "# " << layout.title << "\n";
  os << csv_escape("", ',');
  for (const auto& c : g.col_names) os << "," << csv_escape(c, ',');
  os << "\n";
  for (const auto& [label, cells] : g.rows) {
    os << csv_escape(label, ',');
    for (const auto& c : cells) os << "," << csv_escape(c, ',');
    os << "\n";
  }
}

void render_markdown(const Grid& g, const TableLayout& layout,
                     std::ostringstream& os) {
  if (!layout.title.empty()) os << "## " << layout.title << "\n\n";
  os << "| |";
  for (const auto& c : g.col_names) os << " " << c << " |";
  os << "\n|---|";
  for (size_t i = 0; i < g.col_names.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& [label, cells] : g.rows) {
    os << "| " << label << " |";
    for (const auto& c : cells) os << " " << (c.empty() ? " " : c) << " |";
    os << "\n";
  }
}

}  // namespace

std::string render_table(const std::vector<NamedResult>& results,
                         const TableLayout& layout, TableFormat format) {
  std::vector<const NamedResult*> cols;
  if (layout.columns.empty()) {
    for (const auto& r : results) cols.push_back(&r);
  } else {
    for (const auto& want : layout.columns) {
      const NamedResult* hit = nullptr;
      for (const auto& r : results)
        if (r.name == want) hit = &r;
      if (!hit)
        throw std::invalid_argument("table layout references unknown specification '" +
                                    want + "'");
      cols.push_back(hit);
    }
  }

  Grid g;
  for (const auto* r : cols) g.col_names.push_back(r->name);

  std::vector<std::string> coef_rows = layout.coef_rows;
  if (coef_rows.empty()) {
    std::set<std::string> seen;
    for (const auto* r : cols)
      for (const auto& nm : r->reg.coefs.names)
        if (nm != "const" && seen.insert(nm).second) coef_rows.push_back(nm);
  }

  for (const auto& coef : coef_rows) {
    std::vector<std::string> cells;
    for (const auto* r : cols) cells.push_back(coef_cell(*r, coef, layout.stars));
    g.rows.emplace_back(coef, std::move(cells));
  }

  if (layout.diagnostics && !cols.empty()) {
    auto add = [&](const std::string& label,
                   const std::function<std::string(const NamedResult&)>& fn) {
      std::vector<std::string> cells;
      for (const auto* r : cols) cells.push_back(fn(*r));
      g.rows.emplace_back(label, std::move(cells));
    };
    add("N", [](const NamedResult& r) { return std::to_string(r.reg.stats.n); });
    std::set<std::string> fe_names;
    for (const auto* r : cols)
      for (const auto& [nm, lv] : r->reg.absorbed_levels) fe_names.insert(nm);
    for (const auto& nm : fe_names) {
      add("FE " + nm + " levels", [&nm](const NamedResult& r) {
        auto it = r.reg.absorbed_levels.find(nm);
        return it == r.reg.absorbed_levels.end() ? std::string()
                                                 : std::to_string(it->second);
      });
    }
    add("Within R2", [](const NamedResult& r) { return fixed3(r.reg.stats.within_r2); });
    add("Adj R2", [](const NamedResult& r) { return fixed3(r.reg.stats.adj_r2); });
    add("RMSE", [](const NamedResult& r) { return fixed3(r.reg.stats.rmse); });
    bool any_iv = false;
    for (const auto* r : cols) any_iv = any_iv || r->is_iv;
    if (any_iv) {
      add("First-stage F", [](const NamedResult& r) {
        return r.is_iv ? fixed1(r.first.f_excluded) : std::string();
      });
      add("Wu-Hausman p", [](const NamedResult& r) {
        if (!r.is_iv) return std::string();
        return r.wu_hausman_degenerate ? std::string("degenerate")
                                       : fixed3(r.wu_hausman_p);
      });
    }
    add("SE", [](const NamedResult& r) { return r.reg.cov.str(); });
  }

  std::ostringstream os;
  if (format == TableFormat::Csv)
    render_csv(g, layout, os);
  else
    render_markdown(g, layout, os);
  return os.str();
}

void emit_table(const std::string& path, const std::vector<NamedResult>& results,
                const TableLayout& layout, TableFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render_table(results, layout, format);
}

}  // namespace draftiv
