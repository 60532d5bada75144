// Copyright 2026 The resebm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resebm/baselm.hpp"
#include "resebm/config.hpp"
#include "resebm/energy.hpp"
#include "resebm/errors.hpp"
#include "resebm/eval.hpp"
#include "resebm/nce.hpp"
#include "resebm/numeric.hpp"
#include "resebm/partition.hpp"
#include "resebm/sampling.hpp"
#include "resebm/seqcore.hpp"

namespace resebm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kCommonKeys = {"experiment", "seed", "budget"};

std::set<std::string> keys(std::initializer_list<const char*> extra) {
  std::set<std::string> out = kCommonKeys;
  for (const char* k : extra) out.insert(k);
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render(const std::function<void(std::ostream&)>& write) {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

struct Context {
  ExperimentConfig config;
  fs::path config_dir;
  fs::path out_dir;
  std::int64_t budget = kDefaultEnumerationBudget;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;
  json summary = json::object();

  // Path-valued keys resolve relative to the config file's directory.
  fs::path input(const std::string& key) const {
    fs::path p = config.get_string(key);
    if (p.is_relative()) p = config_dir / p;
    if (!fs::exists(p)) throw IoError("input '" + key + "' not found: " + p.string());
    return p;
  }
  std::optional<fs::path> optional_input(const std::string& key) const {
    if (!config.has(key)) return std::nullopt;
    return input(key);
  }

  void emit(const std::string& name, std::string content) {
    artifacts.emplace_back(name, std::move(content));
  }
};

template <typename T, typename Reader>
T load(const fs::path& path, Reader reader) {
  std::istringstream in(read_file(path));
  return reader(in);
}

Corpus load_corpus(const fs::path& p) { return load<Corpus>(p, [](std::istream& is) { return read_corpus(is); }); }
BaseLM load_base_lm(const fs::path& p) { return load<BaseLM>(p, [](std::istream& is) { return read_base_lm(is); }); }
EnergyModel load_energy(const fs::path& p) { return load<EnergyModel>(p, [](std::istream& is) { return read_energy(is); }); }
DataDistribution load_data_dist(const fs::path& p) {
  return load<DataDistribution>(p, [](std::istream& is) { return read_data_dist(is); });
}

int as_int(std::int64_t v, const char* what) {
  require(v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max(),
          std::string(what) + " is out of range");
  return static_cast<int>(v);
}

JointModel joint_for(const Context& ctx, const BaseLM& lm, const SequenceSpec& spec) {
  if (auto path = ctx.optional_input("energy")) {
    auto e = load_energy(*path);
    require(e.spec() == spec, "energy spec does not match the data spec");
    return JointModel(lm, std::move(e));
  }
  return JointModel(lm, EnergyModel::zeros(EnergyKind::kLinearBag, lm.vocab(), spec));
}

void gen_data(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"V", "order", "concentration", "p", "T", "count"}));
  const Vocab vocab(as_int(c.get_int("V"), "V"));
  const int order = as_int(c.get_int("order", 1), "order");
  const double concentration = c.get_real("concentration", 1.0);
  const SequenceSpec spec(as_int(c.get_int("p", 0), "p"), as_int(c.get_int("T"), "T"));
  const int count = as_int(c.get_int("count"), "count");

  const auto dist = make_markov_dist(order, vocab, concentration, ctx.seed);
  const auto corpus = sample_corpus(dist, spec, count, ctx.seed);
  ctx.emit("corpus.txt", render([&](std::ostream& os) { write_corpus(os, corpus); }));
  ctx.emit("data_dist.txt", render([&](std::ostream& os) { write_data_dist(os, dist); }));
  ctx.summary["sequences"] = count;
}

void fit_base(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"corpus", "order", "lambda", "ralm_with"}));
  const auto corpus_path = ctx.input("corpus");
  const int order = as_int(c.get_int("order", 1), "order");
  const double lambda = c.get_real("lambda", 1.0);
  const auto other_path = ctx.optional_input("ralm_with");

  const auto corpus = load_corpus(corpus_path);
  auto lm = fit_tabular(corpus, order, lambda);
  if (other_path) lm = ralm_combine(lm, load_base_lm(*other_path));
  ctx.emit("baselm.txt", render([&](std::ostream& os) { write_base_lm(os, lm); }));
  ctx.summary["base_ppl"] = base_ppl(lm, corpus);
}

void train_energy(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"baselm", "corpus", "data_dist", "p", "T", "kind", "hidden", "init",
                     "init_scale", "steps", "batch_pairs", "learning_rate", "eval_every"}));
  const auto lm_path = ctx.input("baselm");
  const auto corpus_path = ctx.optional_input("corpus");
  const auto dist_path = ctx.optional_input("data_dist");
  require(corpus_path.has_value() != dist_path.has_value(),
          "train-energy needs exactly one of 'corpus' or 'data_dist'");
  const auto kind = parse_energy_kind(c.get_string("kind", "linear-bag"));
  const int hidden = as_int(c.get_int("hidden", kDefaultHidden), "hidden");
  const auto init_mode = c.get_string("init", "random");
  require(init_mode == "random" || init_mode == "zeros", "init must be 'random' or 'zeros'");
  const double init_scale = c.get_real("init_scale", 0.05);
  NCEConfig nce;
  nce.steps = as_int(c.get_int("steps", 1000), "steps");
  nce.batch_pairs = as_int(c.get_int("batch_pairs", 64), "batch_pairs");
  nce.learning_rate = c.get_real("learning_rate", 0.1);
  nce.eval_every = as_int(c.get_int("eval_every", 100), "eval_every");
  nce.seed = Rng(ctx.seed).split(1).key();
  nce.enumeration_budget = ctx.budget;
  nce.validate();
  std::optional<SequenceSpec> key_spec;
  if (dist_path)
    key_spec.emplace(as_int(c.get_int("p", 0), "p"), as_int(c.get_int("T"), "T"));
  else
    require(!c.has("p") && !c.has("T"), "'p' and 'T' come from the corpus header");

  const auto lm = load_base_lm(lm_path);
  std::optional<Corpus> corpus;
  std::optional<DataDistribution> dist;
  if (corpus_path) corpus = load_corpus(*corpus_path);
  if (dist_path) dist = load_data_dist(*dist_path);
  const SequenceSpec spec = corpus ? corpus->spec : *key_spec;
  const Vocab vocab = lm.vocab();
  const auto init = init_mode == "zeros"
                        ? EnergyModel::zeros(kind, vocab, spec, hidden)
                        : EnergyModel::random_init(kind, vocab, spec, Rng(ctx.seed).split(0).key(),
                                                   hidden, init_scale);
  const auto result = corpus ? train(init, lm, *corpus, nce) : train(init, lm, *dist, nce);
  ctx.emit("energy.txt", render([&](std::ostream& os) { write_energy(os, result.model); }));
  ctx.emit("trace.csv", render([&](std::ostream& os) { write_trace_csv(os, result.trace); }));
  const auto& last = result.trace.records.back();
  ctx.summary["final_objective"] = last.objective;
  if (last.log_z) ctx.summary["final_logZ"] = *last.log_z;
  if (last.kl) ctx.summary["final_kl"] = *last.kl;
}

void eval_ppl(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"baselm", "energy", "corpus", "n", "exact", "step_sequences"}));
  const auto lm_path = ctx.input("baselm");
  const auto corpus_path = ctx.input("corpus");
  const int n = as_int(c.get_int("n", 128), "n");
  require(n >= 2, "n must be at least 2");
  const bool exact = c.get_bool("exact", false);
  const int step_sequences = as_int(c.get_int("step_sequences", 10), "step_sequences");
  require(step_sequences >= 0, "step_sequences must be non-negative");

  const auto lm = load_base_lm(lm_path);
  const auto corpus = load_corpus(corpus_path);
  const auto joint = joint_for(ctx, lm, corpus.spec);
  const auto& spec = corpus.spec;
  const bool enumerable = capped_pow(lm.vocab().size(), spec.suffix_len(), ctx.budget) > 0;
  if (exact && !enumerable)
    throw BudgetError("exact evaluation needs V^(T-p) within the enumeration budget");

  const double base = base_ppl(lm, corpus);
  PplInterval interval;
  std::optional<double> exact_ppl;
  if (enumerable) exact_ppl = exact_seq_ppl(joint, corpus, ctx.budget);
  if (exact) {
    interval = {*exact_ppl, *exact_ppl};
  } else {
    interval = seq_ppl_bounds(joint, corpus, n, Rng(ctx.seed).split(0).key());
  }

  std::vector<BoundsRow> rows;
  const Rng step_root = Rng(ctx.seed).split(1);
  const auto limit = std::min<std::size_t>(static_cast<std::size_t>(step_sequences), corpus.sequences.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& seq = corpus.sequences[i];
    for (int pos = spec.prefix_len(); pos < spec.total_len(); ++pos) {
      BoundsRow row;
      row.prefix_id = static_cast<int>(i);
      row.t = pos + 1;
      std::optional<double> ex;
      if (enumerable) ex = step_log_prob_bounds(joint, seq, pos, n, 0, true, ctx.budget).lower;
      if (exact) {
        row.lower = row.upper = *ex;
      } else {
        const auto b = step_log_prob_bounds(joint, seq, pos, n, step_root.split(i).key(), false, ctx.budget);
        row.lower = b.lower;
        row.upper = b.upper;
      }
      row.exact = ex;
      rows.push_back(row);
    }
  }
  ctx.emit("bounds.csv", render([&](std::ostream& os) { write_bounds_csv(os, rows); }));
  ctx.emit("ppl.csv", render([&](std::ostream& os) {
             os << "base_ppl,ppl_lower,ppl_upper,exact_ppl\n"
                << format_real(base) << ',' << format_real(interval.lower) << ','
                << format_real(interval.upper) << ',';
             if (exact_ppl) os << format_real(*exact_ppl);
             os << '\n';
           }));
  ctx.summary["base_ppl"] = base;
  ctx.summary["ppl_lower"] = interval.lower;
  ctx.summary["ppl_upper"] = interval.upper;
  if (exact_ppl) ctx.summary["exact_ppl"] = *exact_ppl;
}

void sample(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"baselm", "energy", "prefixes", "p", "T", "count", "n", "k", "method"}));
  const auto lm_path = ctx.input("baselm");
  const auto prefix_path = ctx.optional_input("prefixes");
  const int count = as_int(c.get_int("count"), "count");
  require(count >= 1, "count must be at least 1");
  const int n = as_int(c.get_int("n", 64), "n");
  const auto method = c.get_string("method", "joint");
  require(method == "joint" || method == "exact" || method == "base",
          "method must be one of joint, exact, base");
  std::optional<SequenceSpec> key_spec;
  if (!prefix_path) key_spec.emplace(as_int(c.get_int("p", 0), "p"), as_int(c.get_int("T"), "T"));
  if (key_spec) require(key_spec->prefix_len() == 0, "p > 0 needs a 'prefixes' corpus");

  const auto lm = load_base_lm(lm_path);
  const int k = as_int(c.get_int("k", lm.vocab().size()), "k");
  require(k >= 1 && k <= lm.vocab().size(), "k must be in [1, V]");
  std::optional<Corpus> prefixes;
  if (prefix_path) prefixes = load_corpus(*prefix_path);
  const SequenceSpec spec = prefixes ? prefixes->spec : *key_spec;
  if (prefixes) require(!prefixes->sequences.empty(), "prefix corpus is empty");
  const auto joint = joint_for(ctx, lm, spec);

  const auto p = static_cast<std::size_t>(spec.prefix_len());
  auto prefix_of = [&](int i) {
    if (!prefixes) return Sequence{};
    const auto& s = prefixes->sequences[static_cast<std::size_t>(i) % prefixes->sequences.size()];
    return Sequence(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(p));
  };

  Corpus out{spec, lm.vocab(), {}, ctx.seed, method};
  std::vector<ResampleDraw> draws;
  std::map<Sequence, ExactJointSampler> exact_samplers;
  const Rng root(ctx.seed);
  for (int i = 0; i < count; ++i) {
    const auto prefix = prefix_of(i);
    const auto ui = static_cast<std::uint64_t>(i);
    if (method == "joint") {
      draws.push_back(topk_joint_sample_detailed(joint, prefix, n, k, root.split(ui).key()));
      out.sequences.push_back(draws.back().sample());
    } else if (method == "exact") {
      auto it = exact_samplers.find(prefix);
      if (it == exact_samplers.end())
        it = exact_samplers.emplace(prefix, ExactJointSampler(joint, prefix, ctx.budget)).first;
      Rng rng = root.split(ui);
      out.sequences.push_back(it->second.draw(rng));
    } else {
      Rng rng = root.split(ui);
      out.sequences.push_back(sample_suffix(lm, prefix, spec, k, rng));
    }
  }
  ctx.emit("samples.txt", render([&](std::ostream& os) { write_corpus(os, out); }));
  if (method == "joint")
    ctx.emit("samples_resample.csv", render([&](std::ostream& os) { write_resample_csv(os, draws); }));
  ctx.summary["samples"] = count;
}

void discriminate(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"energy", "positives", "negatives", "threshold", "baselm", "lm_threshold"}));
  const auto energy_path = ctx.input("energy");
  const auto pos_path = ctx.input("positives");
  const auto neg_path = ctx.input("negatives");
  const double threshold = c.get_real("threshold", 0.0);
  const auto lm_path = ctx.optional_input("baselm");
  std::optional<double> lm_threshold;
  if (lm_path) lm_threshold = c.get_real("lm_threshold");

  const auto model = load_energy(energy_path);
  const auto pos = load_corpus(pos_path);
  const auto neg = load_corpus(neg_path);
  require(pos.spec == model.spec() && neg.spec == model.spec(), "corpora do not match the energy spec");
  const double acc = balanced_accuracy(model, pos.sequences, neg.sequences, threshold);
  std::optional<double> lm_acc;
  if (lm_path)
    lm_acc = lm_score_accuracy(load_base_lm(*lm_path), pos.spec, pos.sequences, neg.sequences, *lm_threshold);
  ctx.emit("accuracy.csv", render([&](std::ostream& os) {
             os << "scorer,threshold,accuracy\n";
             os << "energy," << format_real(threshold) << ',' << format_real(acc) << '\n';
             if (lm_acc) os << "baselm," << format_real(*lm_threshold) << ',' << format_real(*lm_acc) << '\n';
           }));
  ctx.summary["accuracy"] = acc;
  if (lm_acc) ctx.summary["lm_accuracy"] = *lm_acc;
}

void analyze(Context& ctx) {
  const auto& c = ctx.config;
  c.check_keys(keys({"analysis", "corpus", "n", "energy", "baselm", "kind", "own", "data"}));
  const auto analysis = c.get_string("analysis");
  if (analysis == "ngram") {
    const auto corpus_path = ctx.input("corpus");
    const int n = as_int(c.get_int("n", 2), "n");
    const auto corpus = load_corpus(corpus_path);
    const double frac = unique_ngram_fraction(corpus.sequences, n, corpus.spec);
    ctx.emit("ngram.csv", render([&](std::ostream& os) {
               os << "n,unique_fraction\n" << n << ',' << format_real(frac) << '\n';
             }));
    ctx.summary["unique_fraction"] = frac;
  } else if (analysis == "perturb") {
    const auto energy_path = ctx.input("energy");
    const auto lm_path = ctx.input("baselm");
    const auto corpus_path = ctx.input("corpus");
    const auto kind = parse_perturbation_kind(c.get_string("kind", "replace-random"));
    const auto profile = perturbation_profile(load_energy(energy_path), load_base_lm(lm_path),
                                              load_corpus(corpus_path), kind, ctx.seed);
    ctx.emit("perturb.csv", render([&](std::ostream& os) {
               os << "pos,mean_delta_energy,mean_delta_nll\n";
               for (const auto& pt : profile)
                 os << pt.pos << ',' << format_real(pt.mean_delta_energy) << ','
                    << format_real(pt.mean_delta_nll) << '\n';
             }));
    ctx.summary["positions"] = profile.size();
  } else if (analysis == "density") {
    const auto lm_path = ctx.input("baselm");
    const auto own_path = ctx.input("own");
    const auto data_path = ctx.input("data");
    const auto lm = load_base_lm(lm_path);
    const auto own = load_corpus(own_path);
    const auto data = load_corpus(data_path);
    require(own.spec == data.spec, "own and data corpora have different specs");
    const auto report = c.has("energy")
                            ? density_gap(joint_for(ctx, lm, own.spec), own.sequences, data.sequences, ctx.budget)
                            : density_gap(lm, own.spec, own.sequences, data.sequences);
    ctx.emit("histogram.csv", render([&](std::ostream& os) { write_histogram_csv(os, report); }));
    ctx.summary["gap"] = report.gap;
  } else {
    throw ValidationError("analysis must be one of ngram, perturb, density");
  }
}

const std::map<std::string, std::function<void(Context&)>>& stages() {
  static const std::map<std::string, std::function<void(Context&)>> s = {
      {"gen-data", gen_data},         {"fit-base", fit_base}, {"train-energy", train_energy},
      {"eval-ppl", eval_ppl},         {"sample", sample},     {"discriminate", discriminate},
      {"analyze", analyze},
  };
  return s;
}

// All artifacts go to temporaries first; only then are they renamed into place.
void commit(const Context& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "'");
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, content] : ctx.artifacts) {
      const fs::path final_path = ctx.out_dir / name;
      fs::path tmp = final_path;
      tmp += ".tmp";
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      os << content;
      os.close();
      if (!os) throw IoError("cannot write '" + tmp.string() + "'");
      staged.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, final_path] : staged) {
      fs::rename(tmp, final_path, ec);
      if (ec) throw IoError("cannot move artifact into place: " + final_path.string());
    }
  } catch (...) {
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
    throw;
  }
}

int fail(std::ostream& out, std::ostream& err, int code, const std::string& category,
         const std::string& message) {
  err << "error: " << message << '\n';
  out << json{{"status", "error"}, {"category", category}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual energy-based sequence modeling toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> budget_override;
  for (const auto& [name, fn] : stages()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "experiment config (key=value)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--budget", budget_override, "enumeration budget");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(out, err, kValidation, "validation", e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Context ctx;
    const fs::path cfg_path(config_path);
    ctx.config = ExperimentConfig::parse(read_file(cfg_path));
    ctx.config_dir = cfg_path.parent_path();
    ctx.out_dir = out_dir;
    if (ctx.config.has("experiment"))
      require(ctx.config.get_string("experiment") == command,
              "config is for '" + ctx.config.get_string("experiment") + "', not '" + command + "'");
    if (seed_override) ctx.config.set("seed", std::to_string(*seed_override));
    if (budget_override) ctx.config.set("budget", std::to_string(*budget_override));
    ctx.seed = ctx.config.get_seed("seed", 0);
    ctx.budget = ctx.config.get_int("budget", kDefaultEnumerationBudget);
    require(ctx.budget >= 1, "budget must be positive");

    stages().at(command)(ctx);
    commit(ctx);

    json summary = {{"status", "ok"}, {"experiment", command}, {"config_hash", ctx.config.content_hash()}};
    json names = json::array();
    for (const auto& a : ctx.artifacts) names.push_back(a.first);
    summary["artifacts"] = names;
    for (auto& [k, v] : ctx.summary.items()) summary[k] = v;
    out << summary.dump() << '\n';
    return kOk;
  } catch (const ValidationError& e) {
    return fail(out, err, kValidation, "validation", e.what());
  } catch (const BudgetError& e) {
    return fail(out, err, kBudget, "budget", e.what());
  } catch (const IoError& e) {
    return fail(out, err, kIo, "io", e.what());
  } catch (const std::exception& e) {
    return fail(out, err, kInternal, "internal", e.what());
  }
}

}  // namespace resebm::cli
