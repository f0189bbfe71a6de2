#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "angleqa/backend.hpp"
#include "angleqa/codec.hpp"
#include "angleqa/harness.hpp"
#include "angleqa/metrics.hpp"
#include "angleqa/sampler.hpp"

namespace py = pybind11;
using namespace angleqa;

namespace {

const SlotRegistry& registry() {
  static const SlotRegistry r = SlotRegistry::defaults();
  return r;
}

OrderPolicy make_policy(const std::string& order, std::uint64_t seed) {
  return OrderPolicy{parse_order_mode(order), seed};
}

Instance make_instance(const std::map<std::string, std::string>& values, std::string id = "") {
  SlotValues v;
  for (const auto& [k, val] : values) v.emplace(registry().resolve(k), val);
  return Instance::make(registry(), std::move(id), std::move(v));
}

py::dict pair_to_dict(const EncodedPair& p) {
  py::dict d;
  d["input"] = p.input;
  d["output"] = p.output;
  d["id"] = p.instance_id;
  d["angle"] = format_angle(registry(), p.angle);
  return d;
}

}  // namespace

PYBIND11_MODULE(_angleqa, m) {
  m.doc() = "Multi-angle QA encoding, metrics, sampling and a toy backend";

  static py::exception<Error> error(m, "AngleError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      PyErr_SetObject(exc.ptr(),
                      py::make_tuple(std::string(to_string(e.code())), e.detail()).ptr());
    }
  });

  m.def("slots", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : registry().entries()) out.emplace_back(e.name, std::string(1, e.abbrev));
    return out;
  });

  m.def("parse_angle", [](const std::string& spec) {
    Angle a = parse_weighted_angle(registry(), spec);
    return py::make_tuple(a.sources, a.targets, a.weight);
  }, py::arg("spec"));

  m.def("encode_input", [](const std::map<std::string, std::string>& values,
                           const std::string& angle, const std::string& order, std::uint64_t seed) {
    return encode_input(registry(), make_instance(values), parse_angle_spec(registry(), angle),
                        make_policy(order, seed));
  }, py::arg("values"), py::arg("angle"), py::arg("order") = "as_given", py::arg("seed") = 0);

  m.def("encode_output", [](const std::map<std::string, std::string>& values,
                            const std::string& angle, const std::string& order, std::uint64_t seed) {
    return encode_output(registry(), make_instance(values), parse_angle_spec(registry(), angle),
                         make_policy(order, seed));
  }, py::arg("values"), py::arg("angle"), py::arg("order") = "as_given", py::arg("seed") = 0);

  m.def("parse_output", [](const std::string& raw, const std::vector<std::string>& expected) {
    std::vector<std::string> resolved;
    for (const auto& s : expected) resolved.push_back(registry().resolve(s));
    auto p = parse_output(registry(), raw, resolved);
    std::map<std::string, std::string> values(p.values.begin(), p.values.end());
    return py::make_tuple(values, p.missing);
  }, py::arg("raw"), py::arg("expected") = std::vector<std::string>{});

  m.def("parse_input", [](const std::string& text) {
    auto p = parse_input(registry(), text);
    return py::make_tuple(p.targets, p.sources);
  }, py::arg("text"));

  m.def("normalize_answer", &normalize_answer, py::arg("text"));
  m.def("exact_match", [](const std::string& pred, const std::vector<std::string>& golds) {
    return exact_match(pred, golds);
  }, py::arg("prediction"), py::arg("golds"));
  m.def("token_f1", [](const std::string& pred, const std::vector<std::string>& golds) {
    return token_f1(pred, golds);
  }, py::arg("prediction"), py::arg("golds"));
  m.def("rouge_l", [](const std::string& pred, const std::vector<std::string>& golds) {
    return rouge_l(pred, golds);
  }, py::arg("prediction"), py::arg("golds"));
  m.def("mc_select", [](const std::string& pred, const std::string& options) {
    return std::string(1, mc_select(pred, options));
  }, py::arg("prediction"), py::arg("mcoptions"));

  m.def("sample_pairs", [](const std::vector<std::pair<std::string, std::map<std::string, std::string>>>& items,
                           const std::string& angles, std::uint64_t epochs, std::uint64_t seed,
                           const std::string& order, std::uint64_t order_seed) {
    std::vector<Instance> instances;
    for (const auto& [id, values] : items) instances.push_back(make_instance(values, id));
    Dataset d = Dataset::make("python", std::move(instances), parse_angle_list(registry(), angles));
    SamplerConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.policy = make_policy(order, order_seed);
    auto stream = sample_training_pairs(registry(), d, cfg);
    py::list out;
    for (const auto& p : stream.pairs) out.append(pair_to_dict(p));
    return out;
  }, py::arg("items"), py::arg("angles"), py::arg("epochs") = 1, py::arg("seed") = 0,
     py::arg("order") = "as_given", py::arg("order_seed") = 0);

  py::class_<ToyBackend>(m, "ToyBackend")
      .def(py::init([](const std::vector<std::pair<std::string, std::string>>& pairs, double alpha) {
             return ToyBackend::train(pairs, ToyModelParams{alpha});
           }),
           py::arg("pairs"), py::arg("alpha") = 0.1)
      .def("generate", [](const ToyBackend& b, const std::string& input) {
        return b.generate(input, DecodeOptions{}).output;
      }, py::arg("input"))
      .def("force_score", [](const ToyBackend& b, const std::string& input, const std::string& forced) {
        return b.force_score(input, forced);
      }, py::arg("input"), py::arg("forced"))
      .def_property_readonly("vocabulary", &ToyBackend::vocabulary)
      .def_property_readonly("alpha", &ToyBackend::alpha)
      .def("__len__", &ToyBackend::memorized);

  m.def("rank_candidates", [](const std::map<std::string, std::string>& values,
                              const std::vector<std::string>& candidates, const ToyBackend& backend,
                              bool include_m) {
    auto ranked = rank_candidates(registry(), make_instance(values), candidates, backend, include_m,
                                  OrderPolicy::as_given());
    std::vector<std::tuple<std::string, double, double>> out;
    for (const auto& c : ranked) out.emplace_back(c.candidate, c.probability, c.logprob_sum);
    return out;
  }, py::arg("values"), py::arg("candidates"), py::arg("backend"), py::arg("include_m") = false);

  m.def("risk_coverage", [](const std::vector<std::pair<double, int>>& items) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : risk_coverage(items)) out.emplace_back(p.coverage, p.accuracy);
    return out;
  }, py::arg("items"));
}
