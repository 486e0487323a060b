#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "spoofvqa/loss.hpp"
#include "spoofvqa/metrics.hpp"
#include "spoofvqa/pipeline.hpp"
#include "spoofvqa/rng.hpp"
#include "spoofvqa/scf.hpp"
#include "spoofvqa/synth.hpp"

namespace py = pybind11;
using namespace spoofvqa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_array(const Array& a, const char* what) {
  if (a.ndim() != 2)
    throw std::invalid_argument(std::string(what) + " must be a 2-D array");
  std::vector<double> data(a.data(), a.data() + a.size());
  return Tensor::from_data({static_cast<std::size_t>(a.shape(0)),
                            static_cast<std::size_t>(a.shape(1))},
                           std::move(data));
}

py::array_t<double> array_from_tensor(const Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

std::vector<ScoredSample> scored_samples(const std::vector<double>& scores,
                                         const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels must have equal length");
  std::vector<ScoredSample> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    out.push_back({scores[i], labels[i] != 0, ""});
  return out;
}

CaptionRecord record_from_dict(const py::dict& d) {
  CaptionRecord r;
  r.image_id = d["image_id"].cast<std::string>();
  const auto label = d["label"].cast<std::string>();
  if (label != "real" && label != "fake")
    throw std::invalid_argument("label must be 'real' or 'fake'");
  r.label = label == "real" ? RecordLabel::real : RecordLabel::fake;
  if (d.contains("spoof_type") && !d["spoof_type"].is_none())
    r.spoof_type =
        spoof_type_from_string(d["spoof_type"].cast<std::string>());
  r.caption = d["caption"].cast<std::string>();
  if (d.contains("caption_source") &&
      d["caption_source"].cast<std::string>() == "spoof_aware")
    r.caption_source = CaptionSource::spoof_aware;
  r.validate();
  return r;
}

py::dict record_to_dict(const CaptionRecord& r) {
  py::dict d;
  d["image_id"] = r.image_id;
  d["label"] = r.label == RecordLabel::real ? "real" : "fake";
  d["spoof_type"] = r.spoof_type.has_value()
                        ? py::object(py::str(to_string(*r.spoof_type)))
                        : py::object(py::none());
  d["caption"] = r.caption;
  d["caption_source"] =
      r.caption_source == CaptionSource::general ? "general" : "spoof_aware";
  return d;
}

KeywordDictionary dict_from_py(const py::object& keywords) {
  if (keywords.is_none()) return KeywordDictionary::defaults();
  KeywordDictionary d;
  for (const auto& item : keywords.cast<py::dict>())
    d.add(item.first.cast<std::string>(),
          spoof_type_from_string(item.second.cast<std::string>()));
  return d;
}

std::string json_dumps(const py::object& obj) {
  return py::module_::import("json").attr("dumps")(obj).cast<std::string>();
}

py::object json_loads(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

// connector with frozen, seed-initialized parameters
class GacModule {
 public:
  GacModule(const py::dict& config, std::uint64_t seed) {
    GacConfig c;
    if (config.contains("d_model")) c.d_model = config["d_model"].cast<std::size_t>();
    if (config.contains("n_heads")) c.n_heads = config["n_heads"].cast<std::size_t>();
    if (config.contains("n_learnable"))
      c.n_learnable = config["n_learnable"].cast<std::size_t>();
    if (config.contains("n_layers_vision"))
      c.n_layers_vision = config["n_layers_vision"].cast<std::size_t>();
    if (config.contains("mlp_hidden"))
      c.mlp_hidden = config["mlp_hidden"].cast<std::size_t>();
    if (config.contains("d_enc")) c.d_enc = config["d_enc"].cast<std::size_t>();
    Rng rng(seed);
    params_ = GacParams::init(c, rng);
  }

  py::array_t<double> forward(const Array& local, const Array& globals) const {
    VisualFeatures vis{tensor_from_array(local, "local"),
                       tensor_from_array(globals, "globals")};
    return array_from_tensor(gac_forward(params_, vis));
  }

  py::array_t<double> forward_ablated(const Array& local,
                                      const Array& globals) const {
    VisualFeatures vis{tensor_from_array(local, "local"),
                       tensor_from_array(globals, "globals")};
    return array_from_tensor(gac_ablated_forward(params_, vis));
  }

  std::size_t n_tokens() const { return params_.config.n_tokens(); }

 private:
  GacParams params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "spoof-VQA toolkit core: connector, losses, caption filtering, "
            "and cross-domain evaluation";

  // ---- metrics ----
  m.def(
      "compute_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return compute_auc(scored_samples(scores, labels));
      },
      py::arg("scores"), py::arg("labels"),
      "Mann-Whitney AUC in percent; labels are 1 for real, 0 for fake.");
  m.def(
      "compute_hter",
      [](const std::vector<double>& scores, const std::vector<int>& labels,
         double threshold) {
        return compute_hter(scored_samples(scores, labels), threshold);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold"),
      "Half total error rate in percent at the given threshold.");
  m.def(
      "select_threshold",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return select_threshold(scored_samples(scores, labels));
      },
      py::arg("scores"), py::arg("labels"),
      "HTER-minimizing threshold; ties break toward the smallest candidate.");

  // ---- scf ----
  m.def("default_keywords", [] {
    py::dict out;
    const auto dict = KeywordDictionary::defaults();
    for (const auto& [k, t] : dict.entries()) out[py::str(k)] = to_string(t);
    return out;
  });
  m.def(
      "filter_spoof_aware",
      [](const py::list& records, const py::object& keywords,
         bool word_boundary) {
        std::vector<CaptionRecord> recs;
        for (const auto& item : records)
          recs.push_back(record_from_dict(item.cast<py::dict>()));
        auto kept = filter_spoof_aware(
            recs, dict_from_py(keywords),
            word_boundary ? MatchMode::word_boundary : MatchMode::substring);
        py::list out;
        for (const auto& r : kept) out.append(record_to_dict(r));
        return out;
      },
      py::arg("records"), py::arg("keywords") = py::none(),
      py::arg("word_boundary") = false,
      "Keep fake records whose caption names a keyword of their own spoof "
      "type.");
  m.def(
      "assemble_dcap",
      [](const py::list& reals, const py::list& fakes) {
        std::vector<CaptionRecord> r, f;
        for (const auto& item : reals)
          r.push_back(record_from_dict(item.cast<py::dict>()));
        for (const auto& item : fakes)
          f.push_back(record_from_dict(item.cast<py::dict>()));
        auto dcap = assemble_dcap(r, f);
        py::list out;
        for (const auto& e : dcap.entries) out.append(record_to_dict(e));
        return out;
      },
      py::arg("reals"), py::arg("fakes"));
  m.def(
      "caption_stub",
      [](const std::string& label, const py::object& spoof_type,
         const std::string& mode, double hit_rate, std::uint64_t seed) {
        CaptionerStub stub(hit_rate);
        Rng rng(seed);
        std::optional<SpoofType> type;
        if (!spoof_type.is_none())
          type = spoof_type_from_string(spoof_type.cast<std::string>());
        return stub.caption(label == "real" ? RecordLabel::real
                                            : RecordLabel::fake,
                            type,
                            mode == "general" ? CaptionSource::general
                                              : CaptionSource::spoof_aware,
                            rng);
      },
      py::arg("label"), py::arg("spoof_type"), py::arg("mode"),
      py::arg("hit_rate") = 1.0, py::arg("seed") = 0);

  // ---- losses ----
  m.def(
      "lopsided_loss",
      [](const Array& logits, const std::vector<int>& targets,
         std::size_t judgment_end, double alpha) {
        Tensor l = tensor_from_array(logits, "logits");
        auto b = lopsided_loss_value(l, targets, {0, judgment_end},
                                     {judgment_end, targets.size()}, alpha);
        py::dict out;
        out["judgment_loss"] = b.judgment_loss;
        out["interpretation_loss"] = b.interpretation_loss;
        out["total"] = b.total;
        out["alpha"] = b.alpha;
        return out;
      },
      py::arg("logits"), py::arg("targets"), py::arg("judgment_end"),
      py::arg("alpha"),
      "Split cross entropy: judgment covers targets[0:judgment_end], the "
      "interpretation covers the rest.");
  m.def(
      "standard_lm_loss",
      [](const Array& logits, const std::vector<int>& targets) {
        return standard_lm_loss(tensor_from_array(logits, "logits"), targets)
            .scalar();
      },
      py::arg("logits"), py::arg("targets"));

  // ---- connector ----
  py::class_<GacModule>(m, "Gac",
                        "Globally aware connector with seed-initialized "
                        "parameters.")
      .def(py::init<const py::dict&, std::uint64_t>(), py::arg("config"),
           py::arg("seed") = 0)
      .def("forward", &GacModule::forward, py::arg("local"), py::arg("globals"))
      .def("forward_ablated", &GacModule::forward_ablated, py::arg("local"),
           py::arg("globals"))
      .def_property_readonly("n_tokens", &GacModule::n_tokens);

  // ---- synthetic data ----
  m.def(
      "generate_domain",
      [](const py::dict& spec_dict) {
        // reuse the config parser: wrap the spec as a one-domain config
        const std::string text = json_dumps(spec_dict);
        auto cfg_text = std::string(R"({"sources": [)") + text +
                        R"(], "targets": [{"domain_tag": "_t", "n_samples": 2,
                          "spoof_mix": {"print": 1.0}}]})";
        RunConfig cfg = RunConfig::from_json_text(cfg_text);
        auto samples = generate_domain(cfg.sources[0], cfg.features);

        const auto& shape = cfg.features;
        py::array_t<double> local(
            {samples.size(), shape.n_local, shape.d_enc});
        py::array_t<double> globals(
            {samples.size(), shape.n_layers, shape.d_enc});
        py::list records;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          std::copy(samples[i].vis.local.values().begin(),
                    samples[i].vis.local.values().end(),
                    local.mutable_data() + i * shape.n_local * shape.d_enc);
          std::copy(samples[i].vis.globals.values().begin(),
                    samples[i].vis.globals.values().end(),
                    globals.mutable_data() + i * shape.n_layers * shape.d_enc);
          records.append(record_to_dict(samples[i].record));
        }
        py::dict out;
        out["records"] = records;
        out["local"] = local;
        out["globals"] = globals;
        return out;
      },
      py::arg("spec"),
      "Generate one synthetic domain; spec mirrors a config 'sources' "
      "entry.");

  // ---- end-to-end ----
  m.def(
      "run_train_eval",
      [](const py::object& config) {
        const std::string text = py::isinstance<py::str>(config)
                                     ? config.cast<std::string>()
                                     : json_dumps(config);
        RunConfig cfg = RunConfig::from_json_text(text);
        return json_loads(run_train_eval(cfg).to_json());
      },
      py::arg("config"),
      "Full pipeline per seed: captioning + filtering, VQA training, and "
      "the cross-domain protocol. Returns the evaluation report.");
  m.def(
      "run_alpha_sweep",
      [](const py::object& config, const std::vector<double>& alphas) {
        const std::string text = py::isinstance<py::str>(config)
                                     ? config.cast<std::string>()
                                     : json_dumps(config);
        RunConfig cfg = RunConfig::from_json_text(text);
        auto sweep = run_alpha_sweep(
            cfg, alphas.empty() ? cfg.alphas : alphas);
        py::list rows;
        for (const auto& row : sweep.rows) {
          py::dict r;
          r["alpha"] = row.alpha;
          r["hter"] = row.hter;
          r["auc"] = row.auc;
          r["judgment_accuracy"] = row.judgment_accuracy;
          r["hter_mean"] = row.hter_mean;
          r["auc_mean"] = row.auc_mean;
          r["judgment_accuracy_mean"] = row.judgment_mean;
          rows.append(r);
        }
        py::dict out;
        out["seeds"] = sweep.seeds;
        out["rows"] = rows;
        out["csv"] = sweep.to_csv();
        return out;
      },
      py::arg("config"), py::arg("alphas") = std::vector<double>{});
}
