#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cloudrisk/config.hpp"
#include "cloudrisk/errors.hpp"
#include "cloudrisk/experiment.hpp"
#include "cloudrisk/gbt.hpp"
#include "cloudrisk/metrics.hpp"
#include "cloudrisk/risk.hpp"
#include "cloudrisk/trace_io.hpp"

namespace py = pybind11;
using namespace cloudrisk;

namespace {

TrainingSet make_set(const std::vector<std::vector<double>>& x,
                     const std::vector<int>& y,
                     std::vector<std::string> names) {
  if (x.size() != y.size()) throw InputError("x and y differ in length");
  TrainingSet set;
  if (names.empty() && !x.empty()) {
    for (std::size_t f = 0; f < x.front().size(); ++f) {
      names.push_back("f" + std::to_string(f));
    }
  }
  set.feature_names = std::move(names);
  for (std::size_t i = 0; i < x.size(); ++i) set.add(x[i], y[i]);
  set.check();
  return set;
}

py::dict series_dict(const UtilizationSeries& s) {
  py::dict d;
  d["vm_id"] = s.vm_id;
  d["cpu"] = s.cpu;
  d["mem"] = s.mem;
  d["bw"] = s.bw;
  d["gap"] = s.gap;
  return d;
}

py::dict summary_dict(const CellSummary& s) {
  py::dict d;
  d["at"] = s.at;
  d["pt"] = s.pt;
  d["tp"] = s.tp;
  d["fp"] = s.fp;
  d["tn"] = s.tn;
  d["fn"] = s.fn;
  d["intervals"] = s.intervals;
  d["metrics_defined"] = s.metrics_defined;
  d["accuracy"] = s.accuracy;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  d["mse"] = s.mse;
  d["mae"] = s.mae;
  d["ru_dc"] = s.ru_dc;
  d["pw_dc"] = s.pw_dc;
  d["active_servers"] = s.active_servers;
  d["migrations"] = s.migrations;
  d["migration_cost"] = s.migration_cost;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cloudrisk, m) {
  m.doc() = "Threat prediction and migration simulator for multi-tenant clouds";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<InputError> input_error(m, "InputError", base.ptr());
  static py::exception<VersionError> version_error(m, "VersionError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const InputError& e) {
      input_error(e.what());
    } catch (const VersionError& e) {
      version_error(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("vm_vulnerability", &vm_vulnerability, py::arg("vul_score"));
  m.def("aggregate_risk", &aggregate_risk, py::arg("L"), py::arg("H"),
        py::arg("C"), py::arg("N"));

  py::class_<GbtParams>(m, "GbtParams")
      .def(py::init<>())
      .def_readwrite("rounds", &GbtParams::rounds)
      .def_readwrite("max_depth", &GbtParams::max_depth)
      .def_readwrite("learning_rate", &GbtParams::learning_rate)
      .def_readwrite("lambda_", &GbtParams::lambda)
      .def_readwrite("gamma", &GbtParams::gamma)
      .def_readwrite("decision_threshold", &GbtParams::decision_threshold);

  py::class_<GbtModel>(m, "GbtModel")
      .def_property_readonly("feature_names", &GbtModel::feature_names)
      .def_property_readonly("base_score", &GbtModel::base_score)
      .def_property_readonly("tree_count",
                             [](const GbtModel& g) { return g.trees().size(); })
      .def("predict", &GbtModel::predict, py::arg("x"))
      .def("classify", &GbtModel::classify, py::arg("x"))
      .def("feature_importance", &GbtModel::feature_importance)
      .def("to_json", [](const GbtModel& g) { return gbt_to_json(g).dump(); })
      .def_static("from_json", [](const std::string& text) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
          throw InputError(std::string("invalid model JSON: ") + e.what());
        }
        return gbt_from_json(doc);
      })
      .def("save", [](const GbtModel& g, const std::string& path) { save_gbt(g, path); })
      .def_static("load", &load_gbt)
      .def("__eq__", [](const GbtModel& a, const GbtModel& b) { return a == b; });

  m.def(
      "train_gbt",
      [](const std::vector<std::vector<double>>& x, const std::vector<int>& y,
         const GbtParams& params, std::vector<std::string> names) {
        return train_gbt(make_set(x, y, std::move(names)), params);
      },
      py::arg("x"), py::arg("y"), py::arg("params") = GbtParams{},
      py::arg("feature_names") = std::vector<std::string>{});

  m.def(
      "rfe_select",
      [](const std::vector<std::vector<double>>& x, const std::vector<int>& y,
         std::size_t keep, std::vector<std::string> names) {
        return rfe_select(make_set(x, y, std::move(names)), keep).selected;
      },
      py::arg("x"), py::arg("y"), py::arg("keep"),
      py::arg("feature_names") = std::vector<std::string>{});

  m.def(
      "evaluate",
      [](const std::vector<double>& probs, const std::vector<int>& labels,
         double threshold) -> py::object {
        const auto b = evaluate(probs, labels, threshold);
        if (!b) return py::none();
        py::dict d;
        d["tp"] = b->confusion.tp;
        d["fp"] = b->confusion.fp;
        d["tn"] = b->confusion.tn;
        d["fn"] = b->confusion.fn;
        d["accuracy"] = b->accuracy;
        d["precision"] = b->precision;
        d["recall"] = b->recall;
        d["f1"] = b->f1;
        d["mse"] = b->mse;
        d["mae"] = b->mae;
        return d;
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("threshold") = 0.5);

  py::class_<IntervalReport>(m, "IntervalReport")
      .def_readonly("interval", &IntervalReport::interval)
      .def_readonly("minutes", &IntervalReport::minutes)
      .def_readonly("active_vms", &IntervalReport::active_vms)
      .def_readonly("at", &IntervalReport::at)
      .def_readonly("pt", &IntervalReport::pt)
      .def_readonly("ut", &IntervalReport::ut)
      .def_readonly("true_positives", &IntervalReport::true_positives)
      .def_readonly("false_positives", &IntervalReport::false_positives)
      .def_readonly("true_negatives", &IntervalReport::true_negatives)
      .def_readonly("accuracy", &IntervalReport::accuracy)
      .def_readonly("f1", &IntervalReport::f1)
      .def_readonly("migrations", &IntervalReport::migrations)
      .def_readonly("migration_cost", &IntervalReport::migration_cost)
      .def_readonly("ru_dc", &IntervalReport::ru_dc)
      .def_readonly("pw_dc", &IntervalReport::pw_dc)
      .def_readonly("active_servers", &IntervalReport::active_servers);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property(
          "policies",
          [](const ExperimentConfig& c) {
            std::vector<std::string> out;
            for (auto p : c.plan.policies) out.emplace_back(to_string(p));
            return out;
          },
          [](ExperimentConfig& c, const std::vector<std::string>& names) {
            c.plan.policies.clear();
            for (const auto& n : names) c.plan.policies.push_back(parse_policy(n));
          })
      .def_property(
          "malicious", [](const ExperimentConfig& c) { return c.plan.malicious_fractions; },
          [](ExperimentConfig& c, std::vector<double> v) { c.plan.malicious_fractions = std::move(v); })
      .def_property(
          "seeds", [](const ExperimentConfig& c) { return c.plan.seeds; },
          [](ExperimentConfig& c, std::vector<std::uint64_t> v) { c.plan.seeds = std::move(v); })
      .def_property(
          "intervals", [](const ExperimentConfig& c) { return c.plan.intervals; },
          [](ExperimentConfig& c, int v) { c.plan.intervals = v; })
      .def_property(
          "predictor",
          [](const ExperimentConfig& c) { return std::string(to_string(c.plan.predictor)); },
          [](ExperimentConfig& c, const std::string& v) { c.plan.predictor = parse_toggle(v); });

  m.def("standard_config", &standard_config);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("yaml_text"),
        py::arg("base_dir") = ".");

  m.def(
      "run_cell",
      [](const ExperimentConfig& config, const std::string& policy,
         double malicious, std::uint64_t seed, bool predictor) {
        CellSpec cell{parse_policy(policy), malicious, seed, predictor};
        py::gil_scoped_release release;
        return run_cell(config, cell).reports;
      },
      py::arg("config"), py::arg("policy") = "ffd", py::arg("malicious") = 0.05,
      py::arg("seed") = 1, py::arg("predictor") = true);

  m.def(
      "summarize",
      [](const std::vector<IntervalReport>& reports) {
        return summary_dict(summarize(reports));
      },
      py::arg("reports"));

  m.def(
      "run_experiment",
      [](const ExperimentConfig& config, const std::string& out_dir, int jobs) {
        ExperimentOutcome o;
        {
          py::gil_scoped_release release;
          o = run_experiment(config, out_dir, jobs);
        }
        py::list cells;
        for (const auto& c : o.cells) {
          py::dict d;
          d["id"] = c.cell.id();
          d["completed"] = c.completed;
          d["error"] = c.error;
          d["summary"] = summary_dict(summarize(c.reports));
          cells.append(d);
        }
        return cells;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("jobs") = 1);

  m.def(
      "ingest",
      [](const std::string& path, const std::string& config_path) {
        const ExperimentConfig cfg =
            config_path.empty() ? standard_config() : load_config(config_path);
        const IngestResult r = ingest(path, cfg.workload.mapping);
        py::dict d;
        py::list series;
        for (const auto& s : r.series) series.append(series_dict(s));
        d["series"] = series;
        d["source_ids"] = r.source_ids;
        d["rows"] = r.rows;
        d["rejected"] = r.rejected.size();
        d["clamped"] = r.clamped;
        d["duplicates"] = r.duplicates;
        d["gaps"] = r.gaps;
        return d;
      },
      py::arg("path"), py::arg("config_path") = "");

  m.def(
      "synthesize_traces",
      [](std::size_t vm_count, std::size_t samples, std::uint64_t seed) {
        SynthesisSpec spec;
        spec.vm_count = vm_count;
        spec.samples = samples;
        spec.seed = seed;
        py::list out;
        for (const auto& s : synthesize_traces(spec)) out.append(series_dict(s));
        return out;
      },
      py::arg("vm_count") = 120, py::arg("samples") = 144, py::arg("seed") = 1);
}
