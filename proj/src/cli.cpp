// Copyright (c) 2026 the itb authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (see LICENSE).

#include "itb/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "itb/distsim.hpp"
#include "itb/metrics.hpp"
#include "itb/replay.hpp"
#include "itb/synth.hpp"
#include "itb/trace_io.hpp"

namespace itb {

namespace {

namespace fs = std::filesystem;

std::uint64_t parse_size(const std::string& text) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [p, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || p == begin)
    raise(Errc::invalid_spec, "bad size '" + text + "'");
  std::string suffix(p, end);
  std::uint64_t mult = 1;
  if (suffix.empty() || suffix == "B") mult = 1;
  else if (suffix == "K" || suffix == "KB" || suffix == "KiB") mult = 1ull << 10;
  else if (suffix == "M" || suffix == "MB" || suffix == "MiB") mult = 1ull << 20;
  else if (suffix == "G" || suffix == "GB" || suffix == "GiB") mult = 1ull << 30;
  else raise(Errc::invalid_spec, "bad size suffix '" + suffix + "'");
  return value * mult;
}

PacingMode parse_pacing(const std::string& text) {
  if (text == "full") return PacingMode::full();
  if (text == "fast") return PacingMode::fast();
  if (text.rfind("scale:", 0) == 0) {
    try {
      return PacingMode::scaled(std::stod(text.substr(6)));
    } catch (const std::exception&) {
    }
  }
  raise(Errc::invalid_spec, "bad pacing '" + text + "' (full, scale:<f>, fast)");
}

void parse_policy(const std::string& text, StripeConfig& cfg) {
  if (text == "rr") {
    cfg.policy = Placement::round_robin;
    return;
  }
  if (text.rfind("hash:", 0) == 0) {
    cfg.policy = Placement::hashed;
    std::string seed = text.substr(5);
    auto [p, ec] = std::from_chars(seed.data(), seed.data() + seed.size(),
                                   cfg.hash_seed);
    if (ec == std::errc() && p == seed.data() + seed.size()) return;
  }
  raise(Errc::invalid_spec, "bad policy '" + text + "' (rr, hash:<seed>)");
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text,
                                          const std::string& what) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || v == 0)
      raise(Errc::invalid_spec, "bad " + what + " list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) raise(Errc::invalid_spec, what + " list is empty");
  return out;
}

std::uint64_t seed_or_env(const CLI::Option* opt, std::uint64_t flag_value,
                          std::uint64_t fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("ITB_SEED")) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(env, env + std::strlen(env), v);
    if (ec == std::errc() && p == env + std::strlen(env)) return v;
    raise(Errc::invalid_spec, std::string("bad ITB_SEED value '") + env + "'");
  }
  return fallback;
}

std::string config_echo_string(const std::map<std::string, std::string>& config) {
  std::string echo;
  for (const auto& [k, v] : config) {
    if (!echo.empty()) echo += ';';
    echo += k + '=' + v;
  }
  return echo;
}

// Loads the trace files and replicates them round-robin into n superposed
// stream instances, relabeled 0..n-1.
std::vector<IoStream> superpose(const std::vector<std::string>& files,
                                std::size_t n_streams, RepairMode mode) {
  std::vector<IoStream> bases;
  bases.reserve(files.size());
  for (const auto& f : files) bases.push_back(parse_trace_file(f, mode));
  std::vector<IoStream> streams;
  streams.reserve(n_streams);
  for (std::size_t i = 0; i < n_streams; ++i)
    streams.push_back(relabel_stream(bases[i % bases.size()],
                                     static_cast<std::uint32_t>(i)));
  return streams;
}

// Start offsets for n streams: zeros unless randomized; a sidecar file, when
// given, is the durable source (created on first use, reused afterwards).
std::vector<std::int64_t> resolve_offsets(std::size_t n, bool randomized,
                                          const std::string& sidecar,
                                          std::uint64_t seed) {
  if (!sidecar.empty()) {
    if (fs::exists(sidecar)) {
      auto offsets = load_offsets_file(sidecar);
      if (offsets.size() < n)
        raise(Errc::invalid_spec,
              "offsets file " + sidecar + " has " +
                  std::to_string(offsets.size()) + " entries, need " +
                  std::to_string(n) + " (delete it to redraw)");
      offsets.resize(n);
      return offsets;
    }
    auto offsets = draw_start_offsets(n, seed);
    save_offsets_file(sidecar, offsets);
    return offsets;
  }
  if (randomized) return draw_start_offsets(n, seed);
  return std::vector<std::int64_t>(n, 0);
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) raise(Errc::io_error, "cannot write " + path);
  return file;
}

void write_sim_report(std::ostream& out, const std::vector<OsdPattern>& patterns,
                      const BalanceReport& report, const StripeConfig& cfg,
                      std::uint64_t threshold,
                      const std::map<std::string, std::string>& config) {
  out << "# itb-sim-report v1\n";
  for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
  out.precision(17);
  out << "op,second,sigma,active";
  for (std::uint32_t i = 0; i < cfg.width; ++i) out << ",c" << i;
  out << '\n';
  for (const auto& p : patterns) {
    out << op_kind_name(p.op) << ',' << p.second << ',' << pattern_sigma(p)
        << ',' << classify_active(p, threshold);
    for (auto c : p.counts) out << ',' << c;
    out << '\n';
  }
  out << "# summary\n";
  out << "metric,value\n";
  if (report.avg_sigma_read) out << "avg_sigma_read," << *report.avg_sigma_read << '\n';
  if (report.avg_sigma_write)
    out << "avg_sigma_write," << *report.avg_sigma_write << '\n';
  out << "read_patterns," << report.read_patterns << '\n';
  out << "write_patterns," << report.write_patterns << '\n';
  for (const auto& [k, frac] : report.active_read)
    out << "hist_read_" << k << ',' << frac << '\n';
  for (const auto& [k, frac] : report.active_write)
    out << "hist_write_" << k << ',' << frac << '\n';
}

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num17(const std::optional<double>& v) {
  return v ? num17(*v) : std::string();
}

// ---- subcommand bodies ----

struct GenArgs {
  std::string spec_name = "maxdb-init";
  std::string out;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::uint64_t seed = 0;
  const CLI::Option* seed_opt = nullptr;
};

int run_gen(const GenArgs& args) {
  GenSpec spec = load_gen_spec(args.spec_name);
  for (const auto& [key, value] : args.overrides)
    apply_spec_setting(spec, key, value);
  spec.seed = seed_or_env(args.seed_opt, args.seed, spec.seed);
  IoStream stream = generate(spec);
  write_trace_file(stream, args.out);
  std::cerr << "gen: " << stream.events.size() << " events -> " << args.out
            << '\n';
  return 0;
}

struct IngestArgs {
  std::vector<std::string> traces;
  bool strict = false;
  std::string out;
};

int run_ingest(const IngestArgs& args) {
  if (!args.out.empty() && args.traces.size() != 1)
    raise(Errc::invalid_spec, "--out requires exactly one --trace");
  const RepairMode mode = args.strict ? RepairMode::strict : RepairMode::repair;
  for (const auto& file : args.traces) {
    IoStream stream = parse_trace_file(file, mode);
    auto profile = characterize(stream);
    auto think = derive_think_times(stream);
    std::cout << file << ": stream " << stream.stream_id << ", "
              << stream.events.size() << " events, " << stream.threads.size()
              << " threads\n";
    std::cout << "  op      count      fraction   mean_bytes   total_bytes\n";
    for (std::size_t i = 0; i < op_kind_count; ++i) {
      const auto& k = profile.kinds[i];
      if (k.count == 0) continue;
      char line[160];
      std::snprintf(line, sizeof line, "  %-6s %9llu   %8.4f%%   %10.1f   %11llu\n",
                    op_kind_name(static_cast<OpKind>(i)),
                    static_cast<unsigned long long>(k.count),
                    100.0 * k.fraction, k.mean_bytes.value_or(0.0),
                    static_cast<unsigned long long>(k.total_bytes));
      std::cout << line;
    }
    auto gaps = think.all_gaps();
    if (!gaps.empty()) {
      std::int64_t lo = gaps.front(), hi = gaps.front(), sum = 0;
      for (auto g : gaps) {
        lo = std::min(lo, g);
        hi = std::max(hi, g);
        sum += g;
      }
      std::cout << "  think gaps: " << gaps.size() << ", mean "
                << static_cast<double>(sum) / static_cast<double>(gaps.size()) / 1e6
                << " ms, min " << static_cast<double>(lo) / 1e6 << " ms, max "
                << static_cast<double>(hi) / 1e6 << " ms\n";
    }
    if (!args.out.empty()) write_trace_file(stream, args.out);
  }
  return 0;
}

struct ReplayArgs {
  std::vector<std::string> traces;
  std::string root;
  std::uint64_t streams = 0;  // 0: one per trace file
  std::string pacing = "full";
  bool sync_writes = false;
  std::uint64_t seed = 0;
  const CLI::Option* seed_opt = nullptr;
  std::string out;
  std::string offsets_file;
  bool random_offsets = false;
  bool strict = false;
  bool skip_prepare = false;
  std::vector<std::string> labels;
};

int run_replay(const ReplayArgs& args) {
  const std::uint64_t n =
      args.streams > 0 ? args.streams : args.traces.size();
  const std::uint64_t seed = seed_or_env(args.seed_opt, args.seed, 42);
  const RepairMode mode = args.strict ? RepairMode::strict : RepairMode::repair;

  ReplayPlan plan;
  plan.target_root = args.root;
  plan.sync_writes = args.sync_writes;
  plan.pacing = parse_pacing(args.pacing);
  plan.seed = seed;
  plan.strict = args.strict;

  auto streams = superpose(args.traces, n, mode);
  auto offsets = resolve_offsets(streams.size(), args.random_offsets,
                                 args.offsets_file, seed);
  for (std::size_t i = 0; i < streams.size(); ++i)
    plan.streams.push_back({std::move(streams[i]), offsets[i]});

  if (!args.skip_prepare) prepare_tree(plan);
  ReplayLog log = replay(plan);

  std::map<std::string, std::string> config;
  config["streams"] = std::to_string(n);
  config["pacing"] = args.pacing;
  config["sync"] = args.sync_writes ? "1" : "0";
  config["seed"] = std::to_string(seed);
  std::string traces;
  for (const auto& t : args.traces) {
    if (!traces.empty()) traces += '+';
    traces += fs::path(t).filename().string();
  }
  config["trace"] = traces;
  for (const auto& label : args.labels) {
    auto eq = label.find('=');
    if (eq == std::string::npos)
      raise(Errc::invalid_spec, "--label needs key=value, got '" + label + "'");
    config[label.substr(0, eq)] = label.substr(eq + 1);
  }

  std::ofstream file;
  std::ostream& out = open_output(args.out, file);
  write_replay_log_csv(log, config, out);

  std::size_t errors = 0;
  for (const auto& e : log.entries) errors += e.error != 0 ? 1 : 0;
  std::cerr << "replay: " << log.entries.size() << " ops, " << errors
            << " errors -> " << (args.out.empty() ? "-" : args.out) << '\n';
  return 0;
}

struct SimulateArgs {
  std::vector<std::string> traces;
  std::uint64_t streams = 0;
  std::string stripe_size = "128KiB";
  std::uint32_t width = 4;
  std::string policy = "rr";
  std::uint64_t threshold = default_active_threshold;
  std::uint64_t start_seed = 0;
  const CLI::Option* seed_opt = nullptr;
  std::string offsets_file;
  bool sample_estimator = false;
  bool strict = false;
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  const std::uint64_t n =
      args.streams > 0 ? args.streams : args.traces.size();
  const std::uint64_t seed = seed_or_env(args.seed_opt, args.start_seed, 42);
  const RepairMode mode = args.strict ? RepairMode::strict : RepairMode::repair;

  StripeConfig cfg;
  cfg.stripe_size = parse_size(args.stripe_size);
  cfg.width = args.width;
  parse_policy(args.policy, cfg);
  cfg.validate();

  auto streams = superpose(args.traces, n, mode);
  auto offsets = resolve_offsets(streams.size(), true, args.offsets_file, seed);
  auto patterns = build_patterns(streams, cfg, offsets);
  const auto estimator = args.sample_estimator ? SigmaEstimator::sample
                                               : SigmaEstimator::population;
  auto report = balance_report(patterns, args.threshold, estimator);

  std::map<std::string, std::string> config;
  config["streams"] = std::to_string(n);
  config["stripe_size"] = std::to_string(cfg.stripe_size);
  config["width"] = std::to_string(cfg.width);
  config["policy"] = args.policy;
  config["threshold"] = std::to_string(args.threshold);
  config["start_seed"] = std::to_string(seed);
  config["estimator"] = args.sample_estimator ? "sample" : "population";

  std::ofstream file;
  std::ostream& out = open_output(args.out, file);
  write_sim_report(out, patterns, report, cfg, args.threshold, config);
  std::cerr << "simulate: " << patterns.size() << " patterns -> "
            << (args.out.empty() ? "-" : args.out) << '\n';
  return 0;
}

struct ReportArgs {
  std::vector<std::string> logs;
  bool population = false;
  std::string format = "csv";
  std::string out;
};

int run_report(const ReportArgs& args) {
  if (args.format != "csv" && args.format != "tsv")
    raise(Errc::invalid_spec, "bad format '" + args.format + "'");
  const TableFormat format =
      args.format == "csv" ? TableFormat::csv : TableFormat::tsv;
  const Estimator estimator =
      args.population ? Estimator::population : Estimator::sample;

  std::vector<RunReport> reports;
  for (const auto& path : args.logs) {
    auto loaded = read_replay_log_file(path);
    reports.push_back(
        summarize(loaded.log, config_echo_string(loaded.config)));
  }

  std::ofstream file;
  std::ostream& out = open_output(args.out, file);
  out << "# itb-report v1\n";
  for (const auto& r : reports) emit_report(r, format, out);

  // Group identical configurations and add cross-repetition statistics.
  std::map<std::string, std::vector<RunReport>> groups;
  for (const auto& r : reports) groups[r.config_echo].push_back(r);
  for (const auto& [echo, group] : groups) {
    if (group.size() < 2) continue;
    out << "# repetition-stats config=" << echo << '\n';
    emit_report(repetition_stats(group, estimator), format, out);
  }
  return 0;
}

struct SweepArgs {
  std::vector<std::string> traces;
  std::string root;
  std::string streams_list = "1,2,4,6,8,10,12";
  std::string widths_list = "1,4,8";
  std::uint64_t reps = 3;
  std::string pacing = "full";
  bool sync_writes = false;
  std::string stripe_size = "128KiB";
  std::string policy = "rr";
  std::uint64_t threshold = default_active_threshold;
  std::uint64_t seed = 0;
  const CLI::Option* seed_opt = nullptr;
  std::string offsets_file;
  std::string mode = "both";
  bool population = false;
  std::string out;
};

int run_sweep(const SweepArgs& args) {
  if (args.mode != "replay" && args.mode != "simulate" && args.mode != "both")
    raise(Errc::invalid_spec, "bad mode '" + args.mode + "'");
  const bool do_replay = args.mode != "simulate";
  const bool do_simulate = args.mode != "replay";
  if (do_replay && args.root.empty())
    raise(Errc::invalid_spec, "--root is required when replaying");

  auto stream_counts = parse_u64_list(args.streams_list, "streams");
  auto widths = parse_u64_list(args.widths_list, "widths");
  const std::uint64_t reps = do_replay ? std::max<std::uint64_t>(args.reps, 1) : 1;
  const std::uint64_t seed = seed_or_env(args.seed_opt, args.seed, 42);

  std::uint64_t max_streams = 0;
  for (auto s : stream_counts) max_streams = std::max(max_streams, s);

  // The per-stream start offsets are chosen once and shared by every cell of
  // the matrix; the sidecar makes the choice durable across runs.
  std::string sidecar = args.offsets_file;
  if (sidecar.empty() && !args.out.empty()) sidecar = args.out + ".offsets";
  auto offsets = resolve_offsets(max_streams, true, sidecar, seed);

  StripeConfig base_cfg;
  base_cfg.stripe_size = parse_size(args.stripe_size);
  parse_policy(args.policy, base_cfg);

  std::ofstream file;
  std::ostream& out = open_output(args.out, file);
  out << "# itb-sweep v1\n";
  out << "# pacing=" << args.pacing << " sync=" << (args.sync_writes ? 1 : 0)
      << " seed=" << seed << " stripe_size=" << base_cfg.stripe_size
      << " policy=" << args.policy << " reps=" << reps << '\n';
  out << "# estimator=" << (args.population ? "population" : "sample") << '\n';
  out << "width,streams,rep,read_mean_latency_s,write_mean_latency_s,"
         "aggregate_throughput_bps,wall_duration_s,avg_sigma_read,"
         "avg_sigma_write\n";

  std::ostringstream stats_block;

  for (std::uint64_t width : widths) {
    for (std::uint64_t n : stream_counts) {
      auto streams = superpose(args.traces, n, RepairMode::repair);
      std::vector<std::int64_t> cell_offsets(offsets.begin(),
                                             offsets.begin() + n);

      std::string sigma_read, sigma_write;
      if (do_simulate) {
        StripeConfig cfg = base_cfg;
        cfg.width = static_cast<std::uint32_t>(width);
        auto patterns = build_patterns(streams, cfg, cell_offsets);
        auto balance = balance_report(patterns, args.threshold);
        sigma_read = opt_num17(balance.avg_sigma_read);
        sigma_write = opt_num17(balance.avg_sigma_write);
      }

      if (!do_replay) {
        out << width << ',' << n << ",1,,,,," << sigma_read << ','
            << sigma_write << '\n';
        continue;
      }

      ReplayPlan plan;
      plan.target_root = args.root;
      plan.sync_writes = args.sync_writes;
      plan.pacing = parse_pacing(args.pacing);
      plan.seed = seed;
      for (std::size_t i = 0; i < streams.size(); ++i)
        plan.streams.push_back({streams[i], cell_offsets[i]});
      prepare_tree(plan);

      std::vector<RunReport> cell_reports;
      for (std::uint64_t rep = 1; rep <= reps; ++rep) {
        ReplayLog log = replay(plan);
        std::string echo = "streams=" + std::to_string(n) +
                           ";width=" + std::to_string(width);
        RunReport report = summarize(log, echo);
        cell_reports.push_back(report);
        out << width << ',' << n << ',' << rep << ','
            << opt_num17(report.read_mean_latency_s) << ','
            << opt_num17(report.write_mean_latency_s) << ','
            << num17(report.aggregate_throughput_bps) << ','
            << num17(report.wall_duration_s) << ',' << sigma_read << ','
            << sigma_write << '\n';
      }

      if (cell_reports.size() >= 2) {
        auto stats = repetition_stats(
            cell_reports,
            args.population ? Estimator::population : Estimator::sample);
        for (const auto& [metric, m] : stats.metrics)
          stats_block << width << ',' << n << ',' << metric << ','
                      << num17(m.mean) << ',' << num17(m.stddev) << ','
                      << opt_num17(m.normalized) << '\n';
      }
    }
  }

  if (!stats_block.str().empty()) {
    out << "# repetition stats\n";
    out << "width,streams,metric,mean,stddev,normalized_stddev\n";
    out << stats_block.str();
  }
  return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"trace-driven filesystem benchmark toolkit"};
  app.name("itb");
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace");
  gen->add_option("--spec", gen_args.spec_name,
                  "Builtin profile name or key=value spec file");
  gen->add_option("--out", gen_args.out, "Output trace file")->required();
  gen_args.seed_opt = gen->add_option("--seed", gen_args.seed, "Generator seed");
  // Every spec field is also a flag; flags override the spec file.
  static const std::pair<const char*, const char*> spec_flags[] = {
      {"--mix-read", "mix_read"},       {"--mix-write", "mix_write"},
      {"--mix-lseek", "mix_lseek"},     {"--mix-meta", "mix_meta"},
      {"--mix-open", "mix_open"},       {"--mix-close", "mix_close"},
      {"--read-size", "read_size_model"},
      {"--write-size", "write_size_model"},
      {"--think", "think_model"},       {"--files", "n_files"},
      {"--file-size", "file_size_bytes"},
      {"--threads", "n_threads"},       {"--events", "n_events"},
  };
  auto overrides = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& [flag, key] : spec_flags) {
    std::string key_copy = key;
    gen->add_option_function<std::string>(
        flag,
        [overrides, key_copy](const std::string& value) {
          (*overrides)[key_copy] = value;
        },
        std::string("Spec setting ") + key);
  }
  gen->callback([&gen_args, overrides]() {
    for (const auto& [k, v] : *overrides) gen_args.overrides.push_back({k, v});
  });

  IngestArgs ingest_args;
  auto* ingest =
      app.add_subcommand("ingest", "Validate and characterize traces");
  ingest->add_option("--trace", ingest_args.traces, "Trace file(s)")
      ->required()
      ->expected(-1);
  ingest->add_flag("--strict", ingest_args.strict,
                   "Reject repairs instead of applying them");
  ingest->add_option("--out", ingest_args.out,
                     "Re-serialize the (single) trace canonically");

  ReplayArgs replay_args;
  auto* rep = app.add_subcommand("replay", "Replay traces against a filesystem");
  rep->add_option("--trace", replay_args.traces, "Trace file(s)")
      ->required()
      ->expected(-1);
  rep->add_option("--root", replay_args.root, "Target directory")->required();
  rep->add_option("--streams", replay_args.streams,
                  "Superposed stream count (default: one per file)");
  rep->add_option("--pacing", replay_args.pacing, "full | scale:<f> | fast");
  rep->add_flag("--sync-writes", replay_args.sync_writes,
                "Open files with O_SYNC");
  replay_args.seed_opt =
      rep->add_option("--seed", replay_args.seed, "Seed (offsets, dummy data)");
  rep->add_option("--out", replay_args.out, "Log CSV (default stdout)");
  rep->add_option("--offsets", replay_args.offsets_file,
                  "Start-offset sidecar file (created on first use)");
  rep->add_flag("--random-offsets", replay_args.random_offsets,
                "Draw start offsets uniformly from [0, 300 s]");
  rep->add_flag("--strict", replay_args.strict, "Fail fast on op errors");
  rep->add_flag("--skip-prepare", replay_args.skip_prepare,
                "Reuse an existing target tree");
  rep->add_option("--label", replay_args.labels,
                  "Extra key=value for the log config echo")
      ->expected(-1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "Map traced accesses onto OSDs and score load balance");
  sim->add_option("--trace", sim_args.traces, "Trace file(s)")
      ->required()
      ->expected(-1);
  sim->add_option("--streams", sim_args.streams,
                  "Superposed stream count (default: one per file)");
  sim->add_option("--stripe-size", sim_args.stripe_size,
                  "Stripe size (e.g. 128KiB)");
  sim->add_option("--width", sim_args.width, "Number of OSDs")->required();
  sim->add_option("--policy", sim_args.policy, "rr | hash:<seed>");
  sim->add_option("--threshold", sim_args.threshold,
                  "Active-entry threshold (default 30)");
  sim_args.seed_opt = sim->add_option("--start-seed", sim_args.start_seed,
                                      "Seed for the stream start offsets");
  sim->add_option("--offsets", sim_args.offsets_file,
                  "Start-offset sidecar file (created on first use)");
  sim->add_flag("--sample-stddev", sim_args.sample_estimator,
                "Use the sample estimator for pattern sigma");
  sim->add_flag("--strict", sim_args.strict,
                "Reject repairs instead of applying them");
  sim->add_option("--out", sim_args.out, "Report CSV (default stdout)");

  ReportArgs report_args;
  auto* report =
      app.add_subcommand("report", "Summarize replay logs into run tables");
  report->add_option("--log", report_args.logs, "Replay log CSV(s)")
      ->required()
      ->expected(-1);
  report->add_flag("--population", report_args.population,
                   "Population stddev estimator (default: sample)");
  report->add_option("--format", report_args.format, "csv | tsv");
  report->add_option("--out", report_args.out, "Output file (default stdout)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand(
      "sweep", "Run the stream-count x stripe-width experiment matrix");
  sweep->add_option("--trace", sweep_args.traces, "Trace file(s)")
      ->required()
      ->expected(-1);
  sweep->add_option("--root", sweep_args.root, "Target directory (replay)");
  sweep->add_option("--streams", sweep_args.streams_list,
                    "Stream counts (default 1,2,4,6,8,10,12)");
  sweep->add_option("--widths", sweep_args.widths_list,
                    "Stripe widths (default 1,4,8)");
  sweep->add_option("--reps", sweep_args.reps, "Repetitions per cell");
  sweep->add_option("--pacing", sweep_args.pacing, "full | scale:<f> | fast");
  sweep->add_flag("--sync-writes", sweep_args.sync_writes,
                  "Open files with O_SYNC");
  sweep->add_option("--stripe-size", sweep_args.stripe_size, "Stripe size");
  sweep->add_option("--policy", sweep_args.policy, "rr | hash:<seed>");
  sweep->add_option("--threshold", sweep_args.threshold,
                    "Active-entry threshold");
  sweep_args.seed_opt = sweep->add_option("--seed", sweep_args.seed, "Seed");
  sweep->add_option("--offsets", sweep_args.offsets_file,
                    "Start-offset sidecar (default <out>.offsets)");
  sweep->add_option("--mode", sweep_args.mode, "replay | simulate | both");
  sweep->add_flag("--population", sweep_args.population,
                  "Population stddev estimator (default: sample)");
  sweep->add_option("--out", sweep_args.out, "Joined CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (ingest->parsed()) return run_ingest(ingest_args);
    if (rep->parsed()) return run_replay(replay_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (report->parsed()) return run_report(report_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_run(const std::vector<std::string>& args) {
  std::vector<std::string> with_name;
  with_name.reserve(args.size() + 1);
  with_name.push_back("itb");
  with_name.insert(with_name.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(with_name.size());
  for (const auto& a : with_name) argv.push_back(a.c_str());
  return cli_run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace itb
