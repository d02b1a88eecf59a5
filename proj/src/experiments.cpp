#include <algorithm>
#include <sstream>

#include "csnet/experiments.hpp"

namespace csnet {

void FeatureBank::add(FeatureSet set) {
  if (set.name.empty()) throw Error("feature set needs a name");
  if (!sets.emplace(set.name, std::move(set)).second)
    throw Error("duplicate feature set: " + set.name);
}

const FeatureSet& FeatureBank::at(const std::string& name) const {
  auto it = sets.find(name);
  if (it == sets.end()) {
    std::string known;
    for (const auto& [n, s] : sets) known += (known.empty() ? "" : ", ") + n;
    throw Error("unknown feature set '" + name + "'; available: {" + known +
                "}; combinations: A+B, ensemble:A,B");
  }
  return it->second;
}

std::vector<std::string> FeatureBank::names() const {
  std::vector<std::string> out;
  for (const auto& [n, s] : sets) out.push_back(n);
  return out;
}

FeatureSet FeatureBank::from_embedding(const std::string& name,
                                       const Embedding& e) {
  FeatureSet set;
  set.name = name;
  std::string prefix = name;
  std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  set.schema = indexed_schema(prefix, static_cast<std::size_t>(e.dim),
                              FeatureGroup::Embedding, FeatureScope::Source);
  set.source_level = true;
  for (std::size_t i = 0; i < e.ids.size(); ++i)
    set.by_key.emplace(e.ids[i], e.vector_of(i));
  return set;
}

FeatureSet FeatureBank::from_hcnf(const HcnfTable& t) {
  FeatureSet set;
  set.name = "HCNF";
  auto schema = std::make_shared<FeatureSchema>();
  for (const auto& n : HcnfVector::names())
    schema->defs.push_back({"hcnf_" + n, FeatureGroup::Network,
                            FeatureScope::Source});
  set.schema = schema;
  set.source_level = true;
  for (const auto& [sid, v] : t.by_source) set.by_key.emplace(sid, v.values());
  return set;
}

FeatureSpec FeatureSpec::parse(const std::string& text,
                               const FeatureBank& bank) {
  FeatureSpec spec;
  spec.text = text;
  auto parse_concat = [&](const std::string& s) {
    std::vector<std::string> tokens = split(s, '+');
    if (tokens.empty() || s.empty())
      throw Error("empty feature spec member in '" + text + "'");
    for (const auto& tok : tokens) bank.at(tok);  // validates, lists options
    return tokens;
  };
  if (text.rfind("ensemble:", 0) == 0) {
    spec.ensemble = true;
    auto members = split(text.substr(9), ',');
    if (members.size() != 2)
      throw Error("ensemble spec needs exactly two members: '" + text + "'");
    for (const auto& member : members)
      spec.members.push_back(parse_concat(member));
  } else {
    spec.members.push_back(parse_concat(text));
  }
  return spec;
}

Dataset build_dataset(const Corpus& pool, const FeatureBank& bank,
                      const std::vector<std::string>& concat_sets) {
  std::vector<const FeatureSet*> parts;
  std::vector<SchemaPtr> schemas;
  for (const auto& name : concat_sets) {
    parts.push_back(&bank.at(name));
    schemas.push_back(parts.back()->schema);
  }
  auto combined = assemble_schemas(schemas);  // checks name collisions

  Dataset d;
  d.width = combined->size();
  for (const auto& a : pool.articles) {
    const Source* src = pool.find_source(a.source_id);
    if (!src || src->label == SourceLabel::Unlabeled) continue;
    std::vector<double> row;
    row.reserve(d.width);
    for (const auto* part : parts) {
      const auto& key = part->source_level ? a.source_id : a.id;
      auto it = part->by_key.find(key);
      if (it == part->by_key.end())
        throw Error("feature set " + part->name + " has no values for " + key);
      row.insert(row.end(), it->second.begin(), it->second.end());
    }
    d.rows.push_back(std::move(row));
    d.labels.push_back(src->label == SourceLabel::Unreliable ? 1 : 0);
    d.row_meta.emplace_back(a.id, a.source_id);
  }
  d.validate();
  return d;
}

void assert_no_leakage(const Corpus& pool,
                       const std::unordered_set<std::string>& forbidden_ids) {
  for (const auto& a : pool.articles)
    if (forbidden_ids.count(a.id))
      throw Error("leakage: article " + a.id +
                  " is excluded from classification but present in the pool");
}

namespace {

// Row-aligned member datasets of one spec.
struct SpecData {
  FeatureSpec spec;
  std::vector<Dataset> members;

  static SpecData build(const Corpus& pool, const FeatureBank& bank,
                        const FeatureSpec& spec) {
    SpecData sd;
    sd.spec = spec;
    for (const auto& concat : spec.members)
      sd.members.push_back(build_dataset(pool, bank, concat));
    return sd;
  }

  std::size_t size() const { return members[0].size(); }
  const std::vector<std::pair<std::string, std::string>>& meta() const {
    return members[0].row_meta;
  }
  const std::vector<int>& labels() const { return members[0].labels; }

  std::vector<ForestModel> train(const std::vector<std::size_t>& rows,
                                 const ForestParams& fp, std::uint64_t seed,
                                 int workers) const {
    std::vector<ForestModel> models;
    for (std::size_t mi = 0; mi < members.size(); ++mi) {
      Dataset train;
      train.width = members[mi].width;
      for (auto r : rows) {
        train.rows.push_back(members[mi].rows[r]);
        train.labels.push_back(members[mi].labels[r]);
        train.row_meta.push_back(members[mi].row_meta[r]);
      }
      models.push_back(
          train_forest(train, fp, derive_seed(seed, "member", mi), workers));
    }
    return models;
  }

  Prediction predict(const std::vector<ForestModel>& models,
                     std::size_t row) const {
    Prediction p = predict_proba(models[0], members[0].rows[row]);
    if (models.size() == 2)
      p = soft_vote(p, predict_proba(models[1], members[1].rows[row]));
    return p;
  }
};

Metrics mean_metrics(const std::vector<Metrics>& per_run) {
  Metrics m;
  for (const auto& r : per_run) {
    m.accuracy += r.accuracy;
    m.f1 += r.f1;
    m.precision += r.precision;
    m.recall += r.recall;
    m.zero_division = m.zero_division || r.zero_division;
  }
  double n = static_cast<double>(per_run.size());
  if (n > 0) {
    m.accuracy /= n;
    m.f1 /= n;
    m.precision /= n;
    m.recall /= n;
  }
  return m;
}

}  // namespace

std::vector<HoldoutResult> holdout_experiment(
    const Corpus& pool, const FeatureBank& bank,
    const std::vector<std::string>& specs,
    const std::vector<SplitPlan>& splits, const ForestParams& forest,
    std::uint64_t seed, const std::unordered_set<std::string>* forbidden_ids,
    int workers) {
  if (forbidden_ids) assert_no_leakage(pool, *forbidden_ids);

  std::vector<HoldoutResult> results;
  for (const auto& spec_text : specs) {
    auto spec = FeatureSpec::parse(spec_text, bank);
    auto sd = SpecData::build(pool, bank, spec);

    HoldoutResult res;
    res.spec = spec_text;
    for (const auto& plan : splits) {
      std::unordered_set<std::string> test_set(plan.test_sources.begin(),
                                               plan.test_sources.end());
      std::unordered_set<std::string> train_set(plan.train_sources.begin(),
                                                plan.train_sources.end());
      for (const auto& s : plan.test_sources)
        if (train_set.count(s))
          throw Error("split plan places source on both sides: " + s);

      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t r = 0; r < sd.size(); ++r) {
        const auto& sid = sd.meta()[r].second;
        if (test_set.count(sid))
          test_rows.push_back(r);
        else if (train_set.count(sid))
          train_rows.push_back(r);
      }
      if (train_rows.empty() || test_rows.empty())
        throw Error("split " + std::to_string(plan.run_index) +
                    " yields an empty train or test set");

      auto models = sd.train(
          train_rows, forest,
          derive_seed(seed, "holdout:" + spec_text,
                      static_cast<std::uint64_t>(plan.run_index)),
          workers);
      std::vector<int> preds, labels;
      preds.reserve(test_rows.size());
      for (auto r : test_rows) {
        preds.push_back(sd.predict(models, r).label());
        labels.push_back(sd.labels()[r]);
      }
      res.per_run.push_back(compute_metrics(preds, labels));
    }
    res.mean = mean_metrics(res.per_run);
    results.push_back(std::move(res));
  }
  return results;
}

LosoResult leave_one_source_out(
    const Corpus& pool, const FeatureBank& bank,
    const std::vector<std::string>& specs, const ForestParams& forest,
    std::uint64_t seed, const std::unordered_set<std::string>* forbidden_ids,
    int workers) {
  if (forbidden_ids) assert_no_leakage(pool, *forbidden_ids);

  LosoResult result;
  bool first_spec = true;
  for (const auto& spec_text : specs) {
    auto spec = FeatureSpec::parse(spec_text, bank);
    auto sd = SpecData::build(pool, bank, spec);
    if (first_spec) {
      for (std::size_t r = 0; r < sd.size(); ++r) {
        result.article_ids.push_back(sd.meta()[r].first);
        result.source_ids.push_back(sd.meta()[r].second);
        result.labels.push_back(sd.labels()[r]);
      }
    } else {
      // protocol invariant: identical alignment across feature sets
      if (result.article_ids.size() != sd.size())
        throw Error("feature sets disagree on the evaluation rows");
      for (std::size_t r = 0; r < sd.size(); ++r)
        if (result.article_ids[r] != sd.meta()[r].first)
          throw Error("feature sets disagree on row alignment");
    }

    std::vector<std::string> held_sources;
    for (std::size_t r = 0; r < sd.size(); ++r)
      if (held_sources.empty() || held_sources.back() != sd.meta()[r].second)
        held_sources.push_back(sd.meta()[r].second);
    std::sort(held_sources.begin(), held_sources.end());
    held_sources.erase(std::unique(held_sources.begin(), held_sources.end()),
                       held_sources.end());
    if (held_sources.size() < 2)
      throw Error("leave_one_source_out: need at least 2 labeled sources");

    std::vector<int> preds(sd.size(), 0);
    std::vector<double> probas(sd.size(), 0.0);
    for (const auto& held : held_sources) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t r = 0; r < sd.size(); ++r)
        (sd.meta()[r].second == held ? test_rows : train_rows).push_back(r);
      if (test_rows.empty()) continue;
      auto models =
          sd.train(train_rows, forest,
                   derive_seed(seed, "loso:" + spec_text, fnv1a64(held)),
                   workers);
      for (auto r : test_rows) {
        Prediction p = sd.predict(models, r);
        preds[r] = p.label();
        probas[r] = p.proba;
      }
    }
    result.preds.emplace(spec_text, std::move(preds));
    result.probas.emplace(spec_text, std::move(probas));
    first_spec = false;
  }
  return result;
}

std::vector<TimeSeriesReport> temporal_experiment(
    const Corpus& corpus, const BankBuilder& build_bank,
    const std::vector<std::string>& specs, const TemporalParams& params) {
  if (corpus.articles.empty()) throw Error("temporal_experiment: empty corpus");

  const std::int64_t t0 = corpus.articles.front().published_at;
  const std::int64_t day0 = (t0 >= 0 ? t0 / 86400 : (t0 - 86399) / 86400) * 86400;
  const std::int64_t train_end = day0 + static_cast<std::int64_t>(params.train_days) * 86400;
  const std::int64_t t_max = corpus.articles.back().published_at;

  Corpus month1 = slice_by_time(corpus, day0, train_end);
  if (month1.articles.empty())
    throw Error("temporal_experiment: no articles in the training period");

  std::unordered_set<std::string> exclusions;
  FeatureBank bank = build_bank(month1, exclusions);

  Corpus pool = corpus;
  add_exclusions(pool, exclusions);
  pool = drop_excluded(pool);
  assert_no_leakage(pool, exclusions);

  Corpus train_pool = sample_per_source(
      slice_by_time(pool, day0, train_end), params.per_source_n,
      derive_seed(params.seed, "temporal-train-sample"));

  struct SlicePool {
    std::int64_t start, end;
    Corpus pool;
  };
  std::vector<SlicePool> slice_pools;
  for (std::int64_t start = train_end; start <= t_max;
       start += static_cast<std::int64_t>(params.slice_days) * 86400) {
    std::int64_t end = start + static_cast<std::int64_t>(params.slice_days) * 86400;
    Corpus sp = sample_per_source(
        slice_by_time(pool, start, end), params.per_source_n,
        derive_seed(params.seed, "temporal-slice-sample",
                    static_cast<std::uint64_t>(slice_pools.size())));
    if (!sp.articles.empty())
      slice_pools.push_back({start, end, std::move(sp)});
  }

  std::vector<std::pair<std::string, SourceLabel>> labeled;
  for (const auto& s : corpus.sources)
    if (s.label != SourceLabel::Unlabeled) labeled.emplace_back(s.id, s.label);
  auto splits = make_splits(labeled, params.frac, params.runs,
                            derive_seed(params.seed, "temporal-splits"));

  std::vector<TimeSeriesReport> reports;
  for (const auto& spec_text : specs) {
    auto spec = FeatureSpec::parse(spec_text, bank);
    auto train_sd = SpecData::build(train_pool, bank, spec);
    std::vector<SpecData> slice_sd;
    for (const auto& sp : slice_pools)
      slice_sd.push_back(SpecData::build(sp.pool, bank, spec));

    TimeSeriesReport report;
    report.spec = spec_text;
    std::vector<double> in_time_accs;
    std::vector<std::vector<double>> slice_accs(slice_pools.size());
    std::vector<std::size_t> slice_rows(slice_pools.size(), 0);

    for (const auto& plan : splits) {
      std::unordered_set<std::string> test_set(plan.test_sources.begin(),
                                               plan.test_sources.end());
      std::unordered_set<std::string> train_set(plan.train_sources.begin(),
                                                plan.train_sources.end());
      std::vector<std::size_t> train_rows, in_time_rows;
      for (std::size_t r = 0; r < train_sd.size(); ++r) {
        const auto& sid = train_sd.meta()[r].second;
        if (train_set.count(sid)) train_rows.push_back(r);
        if (test_set.count(sid)) in_time_rows.push_back(r);
      }
      if (train_rows.empty()) continue;
      auto models = train_sd.train(
          train_rows, params.forest,
          derive_seed(params.seed, "temporal:" + spec_text,
                      static_cast<std::uint64_t>(plan.run_index)),
          params.workers);

      auto evaluate_rows = [&](const SpecData& sd,
                               const std::vector<std::size_t>& rows)
          -> std::optional<double> {
        if (rows.empty()) return std::nullopt;
        long correct = 0;
        for (auto r : rows)
          if (sd.predict(models, r).label() == sd.labels()[r]) ++correct;
        return static_cast<double>(correct) / static_cast<double>(rows.size());
      };

      if (auto acc = evaluate_rows(train_sd, in_time_rows))
        in_time_accs.push_back(*acc);
      for (std::size_t k = 0; k < slice_pools.size(); ++k) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < slice_sd[k].size(); ++r)
          if (test_set.count(slice_sd[k].meta()[r].second)) rows.push_back(r);
        slice_rows[k] += rows.size();
        if (auto acc = evaluate_rows(slice_sd[k], rows))
          slice_accs[k].push_back(*acc);
      }
    }

    auto mean_of = [](const std::vector<double>& v) {
      if (v.empty()) return 0.0;
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    report.in_time = mean_of(in_time_accs);
    for (std::size_t k = 0; k < slice_pools.size(); ++k) {
      if (slice_accs[k].empty()) continue;  // no test rows landed here
      TimeSlice slice;
      slice.start = slice_pools[k].start;
      slice.end = slice_pools[k].end;
      slice.accuracy = mean_of(slice_accs[k]);
      slice.rows = slice_rows[k];
      report.slices.push_back(slice);
    }
    std::vector<double> slice_means;
    for (const auto& s : report.slices) slice_means.push_back(s.accuracy);
    report.forecast = mean_of(slice_means);
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---- report files ----------------------------------------------------------

void write_holdout_csv(const std::vector<HoldoutResult>& results,
                       const std::string& runs_path,
                       const std::string& summary_path) {
  std::ostringstream runs;
  runs << "spec,run,accuracy,f1,precision,recall\n";
  for (const auto& res : results) {
    for (std::size_t r = 0; r < res.per_run.size(); ++r) {
      const auto& m = res.per_run[r];
      runs << res.spec << ',' << r << ',' << fmt_double(m.accuracy) << ','
           << fmt_double(m.f1) << ',' << fmt_double(m.precision) << ','
           << fmt_double(m.recall) << '\n';
    }
  }
  write_file(runs_path, runs.str());

  std::ostringstream summary;
  summary << "spec,runs,accuracy,f1,precision,recall\n";
  for (const auto& res : results) {
    const auto& m = res.mean;
    summary << res.spec << ',' << res.per_run.size() << ','
            << fmt_double(m.accuracy) << ',' << fmt_double(m.f1) << ','
            << fmt_double(m.precision) << ',' << fmt_double(m.recall) << '\n';
  }
  write_file(summary_path, summary.str());
}

void write_loso_csv(const LosoResult& r, const std::string& path) {
  std::ostringstream out;
  out << "article,source,label";
  for (const auto& [spec, preds] : r.preds) out << ",pred:" << spec;
  out << '\n';
  for (std::size_t i = 0; i < r.article_ids.size(); ++i) {
    out << r.article_ids[i] << ',' << r.source_ids[i] << ',' << r.labels[i];
    for (const auto& [spec, preds] : r.preds) out << ',' << preds[i];
    out << '\n';
  }
  write_file(path, out.str());
}

void write_conditional_csv(const std::vector<ConditionalReport>& reports,
                           const std::string& path) {
  std::ostringstream out;
  out << "feature_a,feature_b,p_a_wrong,p_b_right_given_a_wrong\n";
  for (const auto& r : reports) {
    out << r.feature_a << ',' << r.feature_b << ',' << fmt_double(r.p_a_wrong)
        << ',' << (r.cond_b_right ? fmt_double(*r.cond_b_right) : "NA")
        << '\n';
  }
  write_file(path, out.str());
}

void write_error_distribution_csv(
    const std::vector<std::pair<std::string, ErrorDistribution>>& rows,
    const std::string& path) {
  std::ostringstream out;
  out << "spec,reliable_share,unreliable_share,no_errors\n";
  for (const auto& [spec, d] : rows) {
    out << spec << ',' << fmt_double(d.reliable_share) << ','
        << fmt_double(d.unreliable_share) << ',' << (d.no_errors ? 1 : 0)
        << '\n';
  }
  write_file(path, out.str());
}

void write_timeseries_csv(const std::vector<TimeSeriesReport>& reports,
                          const std::string& path) {
  std::ostringstream out;
  out << "spec,slice,start,end,accuracy,rows\n";
  for (const auto& r : reports) {
    out << r.spec << ",in_time,,," << fmt_double(r.in_time) << ",\n";
    for (std::size_t k = 0; k < r.slices.size(); ++k) {
      const auto& s = r.slices[k];
      out << r.spec << ',' << k << ',' << format_timestamp(s.start) << ','
          << format_timestamp(s.end) << ',' << fmt_double(s.accuracy) << ','
          << s.rows << '\n';
    }
    out << r.spec << ",forecast,,," << fmt_double(r.forecast) << ",\n";
  }
  write_file(path, out.str());
}

}  // namespace csnet
