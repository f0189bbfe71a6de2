#include "angleqa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <deque>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "angleqa/backend.hpp"
#include "angleqa/codec.hpp"
#include "angleqa/harness.hpp"
#include "angleqa/ingest.hpp"
#include "angleqa/report.hpp"
#include "angleqa/sampler.hpp"
#include "angleqa/service.hpp"
#include "angleqa/text.hpp"
#include "json.hpp"

namespace angleqa {

namespace {

using ojson = nlohmann::ordered_json;

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string order = "as_given";
  std::string backend;
  double alpha = 0.1;
  std::size_t max_in_flight = 8;
  std::size_t max_input_tokens = 0;
};

struct DecodeFlags {
  std::string mode = "greedy";
  int beam_size = 1;
  double top_p = 1.0;
  double temperature = 1.0;
  int max_tokens = 128;
  std::int64_t seed = -1;

  DecodeOptions options() const {
    DecodeOptions d;
    d.mode = parse_decode_mode(mode);
    d.beam_size = beam_size;
    d.top_p = top_p;
    d.temperature = temperature;
    d.max_tokens = max_tokens;
    if (seed >= 0) d.seed = static_cast<std::uint64_t>(seed);
    d.validate();
    return d;
  }
};

void add_decode_flags(CLI::App* sub, DecodeFlags& f) {
  sub->add_option("--mode", f.mode, "greedy, beam or nucleus")->capture_default_str();
  sub->add_option("--beam-size", f.beam_size)->capture_default_str();
  sub->add_option("--top-p", f.top_p)->capture_default_str();
  sub->add_option("--temperature", f.temperature)->capture_default_str();
  sub->add_option("--max-tokens", f.max_tokens)->capture_default_str();
  sub->add_option("--decode-seed", f.seed, "nucleus sampling seed");
}

OrderPolicy policy_from(const GlobalFlags& g) {
  return OrderPolicy{parse_order_mode(g.order), g.seed};
}

std::unique_ptr<Backend> backend_from(const GlobalFlags& g, const SlotRegistry& registry) {
  if (g.backend.empty()) {
    throw Error(Errc::InvalidConfig, "--backend toy:<pairs-file> or remote:<base-url> is required");
  }
  RemoteOptions remote;
  remote.max_in_flight = g.max_in_flight;
  remote.max_input_tokens = g.max_input_tokens;
  return make_backend(g.backend, registry, ToyModelParams{g.alpha}, remote);
}

// "answer,explanation", "AE" or "a,e".
std::vector<std::string> parse_slot_list(const SlotRegistry& registry, std::string_view s) {
  std::vector<std::string> out;
  auto pieces = text::split_list(s, ',');
  if (pieces.size() == 1 && pieces[0].size() > 1 && !registry.contains(pieces[0])) {
    bool letters = true;
    for (char c : pieces[0]) letters = letters && registry.name_of(c).has_value();
    if (letters) {
      for (char c : pieces[0]) out.push_back(*registry.name_of(c));
      return out;
    }
  }
  for (const auto& p : pieces) out.push_back(registry.resolve(p));
  return out;
}

// "name=value" assignments in command-line order.
std::vector<std::pair<std::string, std::string>> parse_assignments(
    const SlotRegistry& registry, const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& a : raw) {
    auto eq = a.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidConfig, "expected slot=value, got '" + a + "'");
    }
    out.emplace_back(registry.resolve(a.substr(0, eq)), a.substr(eq + 1));
  }
  return out;
}

Instance instance_from(const SlotRegistry& registry,
                       const std::vector<std::pair<std::string, std::string>>& slots,
                       std::string id = "") {
  SlotValues values;
  for (const auto& [k, v] : slots) {
    if (!values.emplace(k, v).second) throw Error(Errc::DuplicateSlot, "slot '" + k + "' given twice");
  }
  return Instance::make(registry, std::move(id), std::move(values));
}

std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Output file or the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(Errc::IoError, "cannot write '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

struct DatasetFlags {
  std::vector<std::string> paths;
  std::string angles;
  std::string preset;
  std::string corpus;
  std::size_t k = 10;
  std::string central;
};

void add_dataset_flags(CLI::App* sub, DatasetFlags& f, bool many) {
  if (many) {
    sub->add_option("--dataset", f.paths, "dataset file(s), line-delimited JSON")->required();
  } else {
    sub->add_option("--dataset", f.paths, "dataset file, line-delimited JSON")
        ->required()
        ->expected(1);
  }
  sub->add_option("--angles", f.angles, "comma-separated angle specs, e.g. \"QM->AE,Q->A:2\"");
  sub->add_option("--preset", f.preset, "named angle set, e.g. finetune:arc");
  sub->add_option("--corpus", f.corpus, "sentence corpus for retrieved context");
  sub->add_option("--k", f.k, "sentences per retrieved context")->capture_default_str();
  sub->add_option("--central", f.central, "CENTRAL sentence records for explanations");
}

std::vector<Angle> angles_from(const SlotRegistry& registry, const DatasetFlags& f) {
  std::vector<Angle> angles;
  if (!f.preset.empty()) angles = angle_preset(registry, f.preset);
  if (!f.angles.empty()) {
    auto more = parse_angle_list(registry, f.angles);
    angles.insert(angles.end(), more.begin(), more.end());
  }
  return angles;
}

Dataset prepare_dataset(const SlotRegistry& registry, const std::string& path,
                        const DatasetFlags& f, const GlobalFlags& g, std::ostream& err) {
  Diagnostics diag;
  Dataset d = load_dataset(path, registry, &diag);
  for (const auto& w : diag.warnings) err << "warning: " << w << '\n';
  if (!f.corpus.empty()) d = attach_context(registry, d, load_corpus(f.corpus), f.k);
  if (!f.central.empty()) d = attach_explanations(registry, d, load_central_sentences(f.central), g.seed);
  return d;
}

std::string format_prob(double p) {
  std::ostringstream os;
  os << std::setprecision(6) << p;
  return os.str();
}

// ---------------------------------------------------------------------------
// repl

struct Turn {
  std::size_t number = 0;
  std::string input;
  std::string output;
  SlotValues sources;
  ParsedOutput parsed;
};

// Replaces "!<slot-name>" with the previous turn's parsed value for that
// slot, falling back to the value it was given as a source.
std::string substitute_refs(const SlotRegistry& registry, const std::string& value,
                            const Turn* previous) {
  if (!previous) return value;
  std::string out;
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '!') {
      const SlotEntry* best = nullptr;
      for (const auto& e : registry.entries()) {
        if (value.compare(i + 1, e.name.size(), e.name) == 0 &&
            (!best || e.name.size() > best->name.size())) {
          best = &e;
        }
      }
      if (best) {
        const std::string* v = nullptr;
        if (auto it = previous->parsed.values.find(best->name); it != previous->parsed.values.end()) {
          v = &it->second;
        } else if (auto s = previous->sources.find(best->name); s != previous->sources.end()) {
          v = &s->second;
        }
        if (!v) throw Error(Errc::MissingSourceSlot, "previous turn has no '" + best->name + "'");
        out += *v;
        i += 1 + best->name.size();
        continue;
      }
    }
    out += value[i++];
  }
  return out;
}

void write_session(std::ostream& os, const std::deque<Turn>& history) {
  for (const auto& t : history) {
    ojson rec;
    rec["turn"] = t.number;
    rec["input"] = t.input;
    rec["output"] = t.output;
    rec["parsed"] = ojson::object();
    for (const auto& [k, v] : t.parsed.values) rec["parsed"][k] = v;
    rec["missing"] = t.parsed.missing;
    os << rec.dump() << '\n';
  }
}

int run_repl(const SlotRegistry& registry, const Backend& backend, const OrderPolicy& policy,
             const DecodeOptions& decode, std::size_t max_history, std::istream& in,
             std::ostream& out, std::ostream& err) {
  std::deque<Turn> history;
  std::size_t turns = 0;
  std::vector<std::pair<std::string, std::string>> pending;
  std::string line;
  int status = 0;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      if (t == ":quit" || t == ":q") break;
      if (t == ":clear") {
        pending.clear();
        continue;
      }
      if (t == ":history") {
        for (std::size_t i = 0; i < history.size(); ++i) {
          out << "[" << history[i].number << "] " << history[i].input << "\n    -> " << history[i].output << '\n';
        }
        continue;
      }
      if (t.starts_with(":save")) {
        auto path = std::string(text::trim(t.substr(5)));
        std::ofstream f(path, std::ios::binary);
        if (path.empty() || !f) throw Error(Errc::IoError, "cannot write session file '" + path + "'");
        write_session(f, history);
        out << "saved " << history.size() << " turns to " << path << '\n';
        continue;
      }
      if (t.front() == '?') {
        const Turn* previous = history.empty() ? nullptr : &history.back();
        auto targets = parse_slot_list(registry, t.substr(1));
        std::vector<std::string> sources;
        SlotValues values;
        for (const auto& [slot, raw] : pending) {
          auto v = substitute_refs(registry, raw, previous);
          if (values.insert_or_assign(slot, v).second) sources.push_back(slot);
        }
        pending.clear();
        Instance inst = Instance::make(registry, "", values);
        Angle angle = Angle::make(registry, sources, targets);
        Turn turn;
        turn.number = turns++;
        turn.input = encode_input(registry, inst, angle, policy);
        turn.output = backend.generate(turn.input, decode).output;
        turn.sources = inst.values();
        turn.parsed = parse_output(registry, turn.output, angle.targets);
        out << "input:  " << turn.input << '\n' << "output: " << turn.output << '\n';
        for (const auto& slot : angle.targets) {
          if (auto it = turn.parsed.values.find(slot); it != turn.parsed.values.end()) {
            out << slot << ": " << it->second << '\n';
          }
        }
        if (!turn.parsed.missing.empty()) {
          out << "missing: " << text::join(turn.parsed.missing, ", ") << '\n';
        }
        history.push_back(std::move(turn));
        while (history.size() > max_history) history.pop_front();
        continue;
      }
      auto colon = t.find(':');
      if (colon == std::string_view::npos) {
        throw Error(Errc::ParseError,
                    "expected '<slot>: value', '? <targets>' or a :command, got '" +
                        std::string(t) + "'");
      }
      pending.emplace_back(registry.resolve(t.substr(0, colon)),
                           std::string(text::trim(t.substr(colon + 1))));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      status = e.code() == Errc::BackendUnavailable ? 2 : 1;
      pending.clear();
    }
  }
  return status;
}

volatile std::sig_atomic_t g_stop_requested = 0;

void on_signal(int) { g_stop_requested = 1; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Multi-angle question answering: encoding, sampling, evaluation and probing"};
  app.name(args.empty() ? "angleqa" : args.front());
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "file of flag defaults (TOML or INI)");

  GlobalFlags g;
  app.add_option("--seed", g.seed, "seed for scrambling and sampling")->capture_default_str();
  app.add_option("--order", g.order, "slot order: as_given or scrambled")
      ->check(CLI::IsMember({"as_given", "scrambled"}))
      ->capture_default_str();
  app.add_option("--backend", g.backend, "toy:<pairs-file> or remote:<base-url>");
  app.add_option("--alpha", g.alpha, "toy backend off-path probability mass")->capture_default_str();
  app.add_option("--max-in-flight", g.max_in_flight, "remote backend concurrency")->capture_default_str();
  app.add_option("--max-input-tokens", g.max_input_tokens,
                 "remote backend input limit in whitespace tokens (0: none)");

  // encode
  auto* encode = app.add_subcommand("encode", "print the encoded input for slot values");
  std::vector<std::string> enc_slots;
  std::string enc_targets, enc_angle;
  bool enc_output = false;
  encode->add_option("--slots", enc_slots, "slot=value assignments, in source order");
  encode->add_option("--targets", enc_targets, "target slots, e.g. answer,explanation");
  encode->add_option("--angle", enc_angle, "angle spec instead of --targets, e.g. QM->AE");
  encode->add_flag("--output", enc_output, "also print the encoded output (targets need values)");

  // parse
  auto* parse = app.add_subcommand("parse", "parse model output (or encoded input) into slots");
  std::string parse_text, parse_expected;
  bool parse_as_input = false;
  parse->add_option("--text", parse_text, "text to parse (default: stdin)");
  parse->add_option("--expected", parse_expected, "expected slots, e.g. answer,explanation or AE");
  parse->add_flag("--input", parse_as_input, "parse an encoded input instead of an output");

  // sample
  auto* sample = app.add_subcommand("sample", "generate training or evaluation pairs");
  DatasetFlags sample_ds;
  std::uint64_t epochs = 1, max_resample = 100;
  std::string sample_out;
  bool sample_all = false;
  add_dataset_flags(sample, sample_ds, true);
  sample->add_option("--epochs", epochs)->capture_default_str();
  sample->add_option("--max-resample", max_resample)->capture_default_str();
  sample->add_option("--out", sample_out, "output file (default: stdout)");
  sample->add_flag("--all", sample_all, "emit every applicable angle per instance");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a backend on every angle");
  DatasetFlags eval_ds;
  std::string eval_report, eval_records;
  std::vector<std::string> eval_metrics;
  std::size_t workers = 0;
  DecodeFlags eval_decode;
  add_dataset_flags(eval, eval_ds, false);
  eval->add_option("--report", eval_report, "text report file (default: stdout)");
  eval->add_option("--records", eval_records, "line-delimited report records");
  eval->add_option("--metric", eval_metrics, "slot=metric overrides");
  eval->add_option("--workers", workers, "parallel requests (0: auto)");
  add_decode_flags(eval, eval_decode);

  // rank
  auto* rank = app.add_subcommand("rank", "rank candidate answers by forced-decoding probability");
  std::vector<std::string> rank_slots, rank_candidates_list;
  bool include_m = false;
  rank->add_option("--slots", rank_slots, "slot=value assignments")->required();
  rank->add_option("--candidates", rank_candidates_list, "candidate answers")->required();
  rank->add_flag("--include-m", include_m, "condition on the mcoptions slot");

  // feedback
  auto* feedback = app.add_subcommand("feedback", "answer, explain, then answer again with the explanation");
  std::vector<std::string> fb_paths, fb_slots;
  DecodeFlags fb_decode;
  feedback->add_option("--dataset", fb_paths, "dataset file")->expected(1);
  feedback->add_option("--slots", fb_slots, "slot=value assignments for one instance");
  add_decode_flags(feedback, fb_decode);

  // report
  auto* report = app.add_subcommand("report", "aggregate manual score sheets by category");
  std::string sheet_path, report_out;
  std::size_t min_questions = 0;
  ScoreEntry new_entry;
  std::string record_id;
  report->add_option("--sheet", sheet_path, "score sheet (line-delimited JSON)")->required();
  report->add_option("--min-questions", min_questions, "drop categories with fewer questions")
      ->capture_default_str();
  report->add_option("--out", report_out, "report file (default: stdout)");
  report->add_option("--record-id", record_id, "append a manual score for this question id");
  report->add_option("--model", new_entry.model);
  report->add_option("--score", new_entry.score);
  report->add_flag("--incoherent", new_entry.incoherent);
  report->add_option("--category", new_entry.category);

  // repl
  auto* repl = app.add_subcommand("repl", "interactive multi-angle probing");
  std::size_t history = 50;
  DecodeFlags repl_decode;
  repl->add_option("--history", history, "turns kept in the session")->capture_default_str();
  add_decode_flags(repl, repl_decode);

  // serve
  auto* serve = app.add_subcommand("serve", "start the playground HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_angles, serve_preset;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--angles", serve_angles, "angles listed by /api/meta");
  serve->add_option("--preset", serve_preset, "named angle set listed by /api/meta");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  std::vector<std::string> owned = args.empty() ? std::vector<std::string>{"angleqa"} : args;
  for (const auto& a : owned) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const SlotRegistry registry = SlotRegistry::defaults();
  try {
    const OrderPolicy policy = policy_from(g);

    if (encode->parsed()) {
      auto slots = parse_assignments(registry, enc_slots);
      std::vector<std::string> targets;
      std::vector<std::string> sources;
      if (!enc_angle.empty()) {
        Angle a = parse_angle_spec(registry, enc_angle);
        targets = a.targets;
        sources = a.sources;
      } else {
        targets = parse_slot_list(registry, enc_targets);
        for (const auto& [k, v] : slots) {
          if (std::find(targets.begin(), targets.end(), k) == targets.end()) sources.push_back(k);
        }
      }
      Instance inst = instance_from(registry, slots);
      Angle angle = Angle::make(registry, sources, targets);
      out << encode_input(registry, inst, angle, policy) << '\n';
      if (enc_output) out << encode_output(registry, inst, angle, policy) << '\n';
      return 0;
    }

    if (parse->parsed()) {
      std::string textv = parse->count("--text") ? parse_text : read_all(in);
      while (!textv.empty() && (textv.back() == '\n' || textv.back() == '\r')) textv.pop_back();
      ojson res;
      if (parse_as_input) {
        auto p = parse_input(registry, textv);
        res["targets"] = p.targets;
        res["sources"] = ojson::object();
        for (const auto& [k, v] : p.sources) res["sources"][k] = v;
      } else {
        auto expected = parse_expected.empty() ? std::vector<std::string>{}
                                               : parse_slot_list(registry, parse_expected);
        auto p = parse_output(registry, textv, expected);
        res["values"] = ojson::object();
        for (const auto& [k, v] : p.values) res["values"][k] = v;
        res["missing"] = p.missing;
      }
      out << res.dump() << '\n';
      return 0;
    }

    if (sample->parsed()) {
      auto angles = angles_from(registry, sample_ds);
      if (angles.empty()) throw Error(Errc::InvalidConfig, "--angles or --preset is required");
      SamplerConfig cfg{epochs, g.seed, max_resample, policy};
      std::vector<PairStream> streams;
      for (const auto& path : sample_ds.paths) {
        Dataset d = prepare_dataset(registry, path, sample_ds, g, err).with_angles(angles);
        streams.push_back(sample_all ? enumerate_all_angles(registry, d, policy)
                                     : sample_training_pairs(registry, d, cfg));
        for (const auto& w : streams.back().warnings) err << "warning: " << w << '\n';
      }
      std::vector<EncodedPair> pairs =
          streams.size() == 1 ? streams.front().pairs : interleave_equally(streams);
      Sink sink(sample_out, out);
      write_pairs(sink.stream(), registry, pairs);
      std::size_t skipped = 0;
      for (const auto& s : streams) skipped += s.skipped;
      err << "wrote " << pairs.size() << " pairs (" << skipped << " skipped)\n";
      return 0;
    }

    if (eval->parsed()) {
      auto angles = angles_from(registry, eval_ds);
      if (angles.empty() && g.backend.starts_with("toy:")) {
        // Default to the angles the toy model was trained on.
        std::ifstream pf(g.backend.substr(4));
        for (const auto& p : read_pairs(pf, registry)) {
          if (!p.angle.targets.empty() &&
              std::find(angles.begin(), angles.end(), p.angle) == angles.end()) {
            angles.push_back(p.angle);
          }
        }
      }
      if (angles.empty()) throw Error(Errc::InvalidConfig, "--angles or --preset is required");
      Dataset d = prepare_dataset(registry, eval_ds.paths.front(), eval_ds, g, err).with_angles(angles);
      MetricConfig metrics;
      for (const auto& [slot, kind] : parse_assignments(registry, eval_metrics)) {
        metrics.per_slot[slot] = parse_metric_kind(kind);
      }
      auto backend = backend_from(g, registry);
      EvalOptions opts{eval_decode.options(), workers};
      AngleReport rep;
      int status = 0;
      try {
        rep = eval_all_angles(registry, d, *backend, policy, metrics, opts);
      } catch (const EvalInterrupted& e) {
        err << "error: " << e.what() << "\nwriting partial report\n";
        rep = e.partial();
        status = 2;
      }
      Sink sink(eval_report, out);
      sink.stream() << render_angle_report(rep);
      if (!eval_records.empty()) {
        Sink records(eval_records, out);
        write_angle_report(records.stream(), rep);
      }
      return status;
    }

    if (rank->parsed()) {
      auto backend = backend_from(g, registry);
      Instance inst = instance_from(registry, parse_assignments(registry, rank_slots));
      auto ranked = rank_candidates(registry, inst, rank_candidates_list, *backend, include_m, policy);
      for (const auto& c : ranked) {
        out << format_prob(c.probability) << '\t' << format_prob(c.logprob_sum) << '\t'
            << c.candidate << '\n';
      }
      return 0;
    }

    if (feedback->parsed()) {
      auto backend = backend_from(g, registry);
      std::vector<Instance> instances;
      if (!fb_paths.empty()) {
        Diagnostics diag;
        instances = load_dataset(fb_paths.front(), registry, &diag).instances();
      }
      if (!fb_slots.empty()) {
        instances.push_back(instance_from(registry, parse_assignments(registry, fb_slots), "cli"));
      }
      if (instances.empty()) throw Error(Errc::InvalidConfig, "--dataset or --slots is required");
      auto decode = fb_decode.options();
      for (const auto& inst : instances) {
        auto r = explanation_feedback(registry, inst, *backend, policy, decode);
        ojson rec;
        rec["id"] = inst.id();
        rec["direct"] = r.direct_answer ? ojson(*r.direct_answer) : ojson(nullptr);
        rec["explanation"] = r.explanation ? ojson(*r.explanation) : ojson(nullptr);
        rec["fed_back"] = r.fed_back_answer ? ojson(*r.fed_back_answer) : ojson(nullptr);
        rec["missing_explanation"] = r.missing_explanation;
        rec["marker_collision"] = r.marker_collision;
        out << rec.dump() << '\n';
      }
      return 0;
    }

    if (report->parsed()) {
      ScoreSheet sheet;
      if (std::ifstream probe(sheet_path); probe) sheet = ScoreSheet::read(probe);
      if (!record_id.empty()) {
        new_entry.id = record_id;
        if (new_entry.model.empty()) throw Error(Errc::InvalidConfig, "--model is required with --record-id");
        sheet.record(new_entry);
        std::ofstream f(sheet_path, std::ios::binary);
        if (!f) throw Error(Errc::IoError, "cannot write '" + sheet_path + "'");
        sheet.write(f);
      }
      if (sheet.empty()) throw Error(Errc::InvalidConfig, "score sheet '" + sheet_path + "' is empty");
      Sink sink(report_out, out);
      sink.stream() << render_category_report(aggregate_categories(sheet, min_questions));
      return 0;
    }

    if (repl->parsed()) {
      auto backend = backend_from(g, registry);
      return run_repl(registry, *backend, policy, repl_decode.options(), history, in, out, err);
    }

    if (serve->parsed()) {
      std::shared_ptr<const Backend> backend = backend_from(g, registry);
      std::vector<Angle> angles;
      if (!serve_preset.empty()) angles = angle_preset(registry, serve_preset);
      if (!serve_angles.empty()) {
        auto more = parse_angle_list(registry, serve_angles);
        angles.insert(angles.end(), more.begin(), more.end());
      }
      auto service = std::make_shared<const PlaygroundService>(registry, backend, angles, policy);
      PlaygroundServer server(service);
      int bound = server.start(host, port);
      out << "listening on http://" << host << ":" << bound << std::endl;
      g_stop_requested = 0;
      auto old_int = std::signal(SIGINT, on_signal);
      auto old_term = std::signal(SIGTERM, on_signal);
      while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::signal(SIGINT, old_int);
      std::signal(SIGTERM, old_term);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::BackendUnavailable ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace angleqa
