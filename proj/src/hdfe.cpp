#include "draftiv/hdfe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace draftiv {

namespace {

bool has_group(const PanelRow& r) { return r.position > 0 && r.group_size > 0; }

double dummy(bool v) { return v ? 1.0 : 0.0; }

}  // namespace

double resolve_column(const PanelRow& r, const std::string& name,
                      const DesignOptions& options) {
  if (name == "S" || name == "swim" || name == "swim_out_s") return r.swim_out_s;
  if (name == "total_s" || name == "total") return r.total_s;
  if (name == "rank") return r.rank;
  if (name == "age") return r.age;
  if (name == "age_sq" || name == "age2") return r.age_sq;
  if (name == "male") return r.male;
  if (name == "year" || name == "event_year") return static_cast<double>(r.event_year);
  if (name == "Z" || name == "z_loo") return r.z_loo;
  if (name == "Zproj" || name == "z_proj") return r.z_proj;
  if (name == "pre") return dummy(r.period == Period::Pre);
  if (name == "covid") return dummy(r.period == Period::Covid);
  if (name == "post") return dummy(r.period == Period::Post);
  if (name == "sprint") return dummy(r.category == EventCategory::Sprint);
  if (name == "short") return dummy(r.category == EventCategory::Short);
  if (name == "middle") return dummy(r.category == EventCategory::Middle);
  if (name == "long") return dummy(r.category == EventCategory::Long);

  if (name == "D" || name == "position")
    return has_group(r) ? static_cast<double>(r.position) : kMissing;
  if (name == "B" || name == "benefit") return has_group(r) ? r.benefit : kMissing;
  if (name == "groupsize" || name == "group_size")
    return has_group(r) ? static_cast<double>(r.group_size) : kMissing;
  if (name == "cluster") {
    if (!has_group(r)) return kMissing;
    return options.cluster_regressor == DesignOptions::ClusterRegressor::Size
               ? static_cast<double>(r.group_size)
               : static_cast<double>(r.group_index);
  }
  if (name == "leader") return has_group(r) ? dummy(r.leader) : kMissing;
  if (name == "drafter") return has_group(r) ? dummy(r.drafter) : kMissing;
  if (name == "first_drafter") return has_group(r) ? dummy(r.first_drafter) : kMissing;
  if (name == "second_drafter") return has_group(r) ? dummy(r.second_drafter) : kMissing;
  if (name == "third_drafter") return has_group(r) ? dummy(r.third_drafter) : kMissing;
  if (name == "fourth_drafter") return has_group(r) ? dummy(r.fourth_drafter) : kMissing;
  if (name == "fifth_drafter") return has_group(r) ? dummy(r.fifth_drafter) : kMissing;
  if (name == "last_drafter") return has_group(r) ? dummy(r.last_drafter) : kMissing;
  throw std::invalid_argument("unknown column '" + name + "'");
}

bool is_known_column(const std::string& name) {
  static const std::set<std::string> known = {
      "S",        "swim",       "swim_out_s",   "total_s",       "total",
      "rank",     "age",        "age_sq",       "age2",          "male",
      "year",     "event_year", "Z",            "z_loo",         "Zproj",
      "z_proj",   "pre",        "covid",        "post",          "sprint",
      "short",    "middle",     "long",         "D",             "position",
      "B",        "benefit",    "groupsize",    "group_size",    "cluster",
      "leader",   "drafter",    "first_drafter", "second_drafter",
      "third_drafter", "fourth_drafter", "fifth_drafter", "last_drafter"};
  return known.count(name) > 0;
}

OutcomeAudit build_outcome(const std::vector<const PanelRow*>& rows,
                           const OutcomeSpec& spec, std::vector<double>& y,
                           std::vector<char>& keep) {
  OutcomeAudit audit;
  audit.input = static_cast<long>(rows.size());
  y.assign(rows.size(), kMissing);
  keep.assign(rows.size(), 1);

  for (size_t i = 0; i < rows.size(); ++i) {
    double rank = rows[i]->rank;
    if (std::isnan(rank)) {
      keep[i] = 0;  // counted by the caller as a missing-column drop
      continue;
    }
    if (spec.rank_cap && !(rank < *spec.rank_cap)) {
      keep[i] = 0;
      ++audit.dropped_rank_cap;
    }
  }

  if (spec.mode == OutcomeMode::LogRankPlus1) {
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!keep[i]) continue;
      double arg = rows[i]->rank + 1.0;
      if (arg <= 0.0) {
        keep[i] = 0;
        ++audit.dropped_nonpositive_log;
      } else {
        y[i] = std::log(arg);
      }
    }
  } else if (spec.mode == OutcomeMode::CenteredLog) {
    // Event means over the rows that survived the rank cap.
    std::unordered_map<std::string, std::pair<double, long>> acc;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!keep[i]) continue;
      auto& a = acc[rows[i]->event_id];
      a.first += rows[i]->rank;
      a.second += 1;
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!keep[i]) continue;
      const auto& a = acc[rows[i]->event_id];
      double mean = a.first / static_cast<double>(a.second);
      double arg = rows[i]->rank - mean + spec.shift_c;
      if (arg <= 0.0) {
        keep[i] = 0;
        ++audit.dropped_nonpositive_log;
      } else {
        y[i] = std::log(arg);
      }
    }
  } else {
    throw std::invalid_argument("build_outcome handles rank transforms only");
  }

  for (char k : keep)
    if (k) ++audit.output;
  return audit;
}

WithinResult within_transform(Eigen::MatrixXd& m,
                              const std::vector<FactorColumn>& factors,
                              double tol, long max_iter,
                              const std::vector<std::string>* column_names) {
  WithinResult result;
  if (factors.empty() || m.rows() == 0 || m.cols() == 0) return result;
  const Eigen::Index n = m.rows();
  for (const auto& f : factors) {
    if (static_cast<Eigen::Index>(f.ids.size()) != n)
      throw std::invalid_argument("factor '" + f.name + "' length mismatch");
  }

  std::vector<std::vector<double>> counts(factors.size());
  for (size_t fi = 0; fi < factors.size(); ++fi) {
    counts[fi].assign(factors[fi].levels, 0.0);
    for (int id : factors[fi].ids) counts[fi][id] += 1.0;
  }

  auto demean_pass = [&](size_t fi) {
    const auto& f = factors[fi];
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(f.levels, m.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(f.ids[i]) += m.row(i);
    for (int l = 0; l < f.levels; ++l) sums.row(l) /= counts[fi][l];
    for (Eigen::Index i = 0; i < n; ++i) m.row(i) -= sums.row(f.ids[i]);
  };

  if (factors.size() == 1) {
    demean_pass(0);
    result.iterations = 1;
    result.final_delta = 0.0;
    return result;
  }

  Eigen::MatrixXd before(n, m.cols());
  for (long iter = 1; iter <= max_iter; ++iter) {
    before = m;
    for (size_t fi = 0; fi < factors.size(); ++fi) demean_pass(fi);
    double delta = (m - before).cwiseAbs().maxCoeff();
    result.iterations = iter;
    result.final_delta = delta;
    if (delta < tol) return result;
  }

  Eigen::Index worst = 0;
  (m - before).cwiseAbs().colwise().maxCoeff().maxCoeff(&worst);
  std::string label = column_names && worst < static_cast<Eigen::Index>(column_names->size())
                          ? (*column_names)[worst]
                          : "column " + std::to_string(worst);
  std::ostringstream os;
  os << "within transform did not converge after " << max_iter
     << " cycles (last max change " << result.final_delta << " in " << label << ")";
  throw std::runtime_error(os.str());
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
  }
};

}  // namespace

AbsorptionRank absorption_rank(const std::vector<FactorColumn>& factors) {
  AbsorptionRank out;
  for (const auto& f : factors) out.levels_total += f.levels;
  if (factors.empty()) return out;
  if (factors.size() == 1) {
    out.rank = factors[0].levels;
    return out;
  }
  const auto& f1 = factors[0];
  const auto& f2 = factors[1];
  UnionFind uf(f1.levels + f2.levels);
  for (size_t i = 0; i < f1.ids.size(); ++i)
    uf.unite(f1.ids[i], f1.levels + f2.ids[i]);
  std::set<int> roots;
  for (int l = 0; l < f1.levels; ++l) roots.insert(uf.find(l));
  for (int l = 0; l < f2.levels; ++l) roots.insert(uf.find(f1.levels + l));
  out.components = static_cast<long>(roots.size());
  out.rank = f1.levels + f2.levels - out.components;
  for (size_t fi = 2; fi < factors.size(); ++fi)
    out.rank += factors[fi].levels - 1;
  return out;
}

namespace {

// Dense id per distinct key, first-appearance order.
class Encoder {
 public:
  int encode(const std::string& key) {
    auto [it, inserted] = ids_.emplace(key, static_cast<int>(ids_.size()));
    (void)inserted;
    return it->second;
  }
  int levels() const { return static_cast<int>(ids_.size()); }

 private:
  std::unordered_map<std::string, int> ids_;
};

std::string factor_key(const PanelRow& r, FactorKind kind) {
  switch (kind) {
    case FactorKind::Athlete:
      return r.athlete_id;
    case FactorKind::Event:
      return r.event_id;
    case FactorKind::Group:
      return std::to_string(r.group_index);
    case FactorKind::EventGroup:
      return r.event_id + "\x1f" + std::to_string(r.group_index);
  }
  throw std::invalid_argument("unknown factor kind");
}

FactorColumn encode_factor(const std::vector<const PanelRow*>& rows,
                           FactorKind kind) {
  FactorColumn col;
  col.name = to_string(kind);
  col.ids.reserve(rows.size());
  Encoder enc;
  for (const PanelRow* r : rows) col.ids.push_back(enc.encode(factor_key(*r, kind)));
  col.levels = enc.levels();
  return col;
}

}  // namespace

DesignMatrices build_design(const Panel& panel, const FormulaSpec& formula,
                            const DesignOptions& options) {
  formula.validate();
  DesignMatrices out;
  out.audit.input = static_cast<long>(panel.size());

  FactorKind group_kind = options.group_fe_event_keyed ? FactorKind::EventGroup
                                                       : FactorKind::Group;
  auto effective_kind = [&](FactorKind k) {
    return k == FactorKind::Group ? group_kind : k;
  };

  std::vector<Term> terms;
  for (const auto& t : formula.terms) {
    if (formula.filters.drop_leader_term && t.name() == "leader") continue;
    terms.push_back(t);
  }

  // Stage 1: group-size predicate, then band membership.
  std::vector<const PanelRow*> rows;
  std::vector<double> band_treat;
  rows.reserve(panel.size());
  const bool size_filter_active =
      formula.filters.group_size.op != GroupSizePredicate::Op::Any;
  for (const auto& r : panel) {
    if (size_filter_active) {
      if (!has_group(r) || !formula.filters.group_size.pass(r.group_size)) {
        ++out.audit.dropped_group_size;
        continue;
      }
    }
    if (formula.filters.band) {
      if (!has_group(r)) {
        ++out.audit.dropped_band;
        continue;
      }
      auto t = band_treatment(r.position, *formula.filters.band);
      if (!t) {
        ++out.audit.dropped_band;
        continue;
      }
      band_treat.push_back(static_cast<double>(*t));
    }
    rows.push_back(&r);
  }

  // Stage 2: position cap rewrites D and its benefit, never the dummies.
  std::vector<double> eff_pos(rows.size(), kMissing);
  std::vector<double> eff_benefit(rows.size(), kMissing);
  for (size_t i = 0; i < rows.size(); ++i) {
    const PanelRow& r = *rows[i];
    if (!has_group(r)) continue;
    int d = r.position;
    if (formula.filters.position_cap > 0 && d > formula.filters.position_cap)
      d = formula.filters.position_cap;
    eff_pos[i] = static_cast<double>(d);
    eff_benefit[i] = benefit(d, options.benefit_params);
  }

  auto value_of = [&](size_t i, const std::string& name) -> double {
    if (name == "treat") {
      if (!formula.filters.band)
        throw std::invalid_argument("'treat' needs a band filter in the formula");
      return band_treat[i];
    }
    if (name == "const") return 1.0;
    if (name == "D" || name == "position") return eff_pos[i];
    if (name == "B" || name == "benefit") return eff_benefit[i];
    return resolve_column(*rows[i], name, options);
  };
  auto term_value = [&](size_t i, const Term& t) -> double {
    double v = value_of(i, t.a);
    if (!t.b.empty()) v *= value_of(i, t.b);
    return v;
  };

  // Stage 3: outcome (rank cap, transform).
  OutcomeSpec outcome = formula.outcome;
  bool raw_response = outcome.mode == OutcomeMode::Raw ||
                      (!outcome.explicit_mode && is_known_column(formula.response));
  std::vector<double> y(rows.size(), kMissing);
  std::vector<char> keep(rows.size(), 1);
  if (raw_response) {
    for (size_t i = 0; i < rows.size(); ++i) {
      double rank = rows[i]->rank;
      if (outcome.rank_cap && !(std::isnan(rank)) && !(rank < *outcome.rank_cap)) {
        keep[i] = 0;
        ++out.audit.dropped_rank_cap;
        continue;
      }
      y[i] = value_of(i, formula.response);
    }
  } else {
    OutcomeAudit oa = build_outcome(rows, outcome, y, keep);
    out.audit.dropped_rank_cap += oa.dropped_rank_cap;
    out.audit.dropped_nonpositive_log += oa.dropped_nonpositive_log;
  }

  // Stage 4: drop any row with a missing value in a used column, including
  // singleton-group instruments.
  std::vector<std::string> needed_factors;
  for (FactorKind k : formula.absorb) needed_factors.push_back(to_string(effective_kind(k)));
  for (FactorKind k : formula.cluster) needed_factors.push_back(to_string(effective_kind(k)));
  auto factor_available = [&](size_t i, FactorKind k) {
    if (k == FactorKind::Group || k == FactorKind::EventGroup) return has_group(*rows[i]);
    return true;
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!keep[i]) continue;
    bool missing = std::isnan(y[i]);
    for (const auto& t : terms)
      if (!missing && std::isnan(term_value(i, t))) missing = true;
    if (!missing && formula.endogenous && std::isnan(value_of(i, *formula.endogenous)))
      missing = true;
    for (const auto& z : formula.instruments)
      if (!missing && std::isnan(value_of(i, z))) missing = true;
    for (FactorKind k : formula.absorb)
      if (!missing && !factor_available(i, effective_kind(k))) missing = true;
    for (FactorKind k : formula.cluster)
      if (!missing && !factor_available(i, effective_kind(k))) missing = true;
    if (missing) {
      keep[i] = 0;
      ++out.audit.dropped_missing;
    }
  }

  std::vector<const PanelRow*> final_rows;
  std::vector<size_t> final_idx;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (keep[i]) {
      final_rows.push_back(rows[i]);
      final_idx.push_back(i);
    }
  }
  out.audit.output = static_cast<long>(final_rows.size());
  if (final_rows.empty()) {
    std::ostringstream os;
    os << "empty estimation sample after filters (input " << out.audit.input
       << ", dropped: group size " << out.audit.dropped_group_size << ", band "
       << out.audit.dropped_band << ", rank cap " << out.audit.dropped_rank_cap
       << ", log " << out.audit.dropped_nonpositive_log << ", missing "
       << out.audit.dropped_missing << ")";
    throw std::runtime_error(os.str());
  }

  const Eigen::Index n = static_cast<Eigen::Index>(final_rows.size());
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.y[i] = y[final_idx[i]];

  out.X.resize(n, static_cast<Eigen::Index>(terms.size()));
  for (size_t j = 0; j < terms.size(); ++j) {
    out.x_names.push_back(terms[j].name());
    for (Eigen::Index i = 0; i < n; ++i)
      out.X(i, static_cast<Eigen::Index>(j)) = term_value(final_idx[i], terms[j]);
  }

  if (formula.endogenous) {
    out.endog_name = *formula.endogenous;
    out.x_endog.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out.x_endog[i] = value_of(final_idx[i], *formula.endogenous);
    out.z_excluded.resize(n, static_cast<Eigen::Index>(formula.instruments.size()));
    for (size_t j = 0; j < formula.instruments.size(); ++j) {
      out.z_names.push_back(formula.instruments[j]);
      for (Eigen::Index i = 0; i < n; ++i)
        out.z_excluded(i, static_cast<Eigen::Index>(j)) =
            value_of(final_idx[i], formula.instruments[j]);
    }
  }

  // Exact duplicates among the slope columns (endogenous included) are a
  // specification mistake; report every name involved.
  {
    std::vector<std::pair<std::string, const double*>> cols;
    for (size_t j = 0; j < terms.size(); ++j)
      cols.emplace_back(out.x_names[j], out.X.col(static_cast<Eigen::Index>(j)).data());
    if (out.has_endog()) cols.emplace_back(out.endog_name, out.x_endog.data());
    std::set<std::string> dup_names;
    for (size_t a = 0; a < cols.size(); ++a) {
      for (size_t b = a + 1; b < cols.size(); ++b) {
        bool same = true;
        for (Eigen::Index i = 0; i < n && same; ++i)
          same = cols[a].second[i] == cols[b].second[i];
        if (same) {
          dup_names.insert(cols[a].first);
          dup_names.insert(cols[b].first);
        }
      }
    }
    if (!dup_names.empty()) {
      std::string msg = "duplicate regressor columns:";
      for (const auto& nm : dup_names) msg += " " + nm;
      throw std::invalid_argument(msg);
    }
  }

  for (FactorKind k : formula.absorb)
    out.absorb.push_back(encode_factor(final_rows, effective_kind(k)));
  for (FactorKind k : formula.cluster)
    out.cluster.push_back(encode_factor(final_rows, effective_kind(k)));

  out.factor_pool["athlete"] = encode_factor(final_rows, FactorKind::Athlete);
  out.factor_pool["event"] = encode_factor(final_rows, FactorKind::Event);
  bool all_grouped = std::all_of(final_rows.begin(), final_rows.end(),
                                 [](const PanelRow* r) { return has_group(*r); });
  if (all_grouped) {
    out.factor_pool["group"] = encode_factor(final_rows, group_kind);
    out.factor_pool["eventgroup"] = encode_factor(final_rows, FactorKind::EventGroup);
  }

  return out;
}

}  // namespace draftiv
