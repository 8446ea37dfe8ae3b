#include "cloudrisk/forecaster.hpp"

#include <algorithm>
#include <numeric>

#include "cloudrisk/errors.hpp"
#include "cloudrisk/rng.hpp"

namespace cloudrisk {

using nlohmann::json;

bool operator==(const ForecasterModel& a, const ForecasterModel& b) {
  const auto& p = a.config_;
  const auto& q = b.config_;
  return p.kind == q.kind && p.window == q.window && p.hidden == q.hidden &&
         p.epochs == q.epochs && p.batch == q.batch &&
         p.learning_rate == q.learning_rate &&
         p.smoothing_alpha == q.smoothing_alpha &&
         p.max_windows == q.max_windows && p.seed == q.seed &&
         a.w1_ == b.w1_ && a.w2_ == b.w2_;
}

double ForecasterModel::raw(const std::vector<double>& x) const {
  const int w = config_.window;
  if (static_cast<int>(x.size()) != w) {
    throw InputError("forecast window has the wrong length");
  }
  if (config_.kind == ForecasterKind::kExponentialSmoothing) {
    double level = x.front();
    for (double v : x) level += config_.smoothing_alpha * (v - level);
    return level;
  }
  if (w1_.empty()) throw StateError("forecaster has not been trained");
  double out = 0.0;
  for (int j = 0; j < config_.hidden; ++j) {
    double a = 0.0;
    for (int k = 0; k < w; ++k) a += w1_[j * w + k] * x[k];
    if (a > 0.0) out += w2_[j] * a;
  }
  return out;
}

namespace {

struct Sample {
  std::size_t t;  // position of the target in its series
  std::vector<double> x;
  double y;
};

}  // namespace

ForecasterModel train_forecaster(const std::vector<UtilizationSeries>& db,
                                 const ForecasterConfig& config) {
  if (config.window < 1 || config.hidden < 1 || config.epochs < 0 ||
      config.batch < 1) {
    throw ConfigError("invalid forecaster configuration");
  }
  ForecasterModel model(config);
  if (config.kind == ForecasterKind::kExponentialSmoothing) {
    const bool any = std::any_of(db.begin(), db.end(), [](const auto& s) {
      return s.length() > 0;
    });
    if (!any) throw InputError("forecaster training database is empty");
    return model;
  }

  const auto w = static_cast<std::size_t>(config.window);
  std::vector<Sample> samples;
  bool any_data = false;
  for (const auto& s : db) {
    any_data = any_data || s.length() > 0;
    for (std::size_t t = w; t < s.length(); ++t) {
      std::vector<double> x(s.cpu.begin() + static_cast<std::ptrdiff_t>(t - w),
                            s.cpu.begin() + static_cast<std::ptrdiff_t>(t));
      if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
        continue;
      }
      samples.push_back({t, std::move(x), s.cpu[t]});
    }
  }
  if (!any_data) throw InputError("forecaster training database is empty");
  if (samples.size() > config.max_windows) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& a, const Sample& b) { return a.t < b.t; });
    samples.erase(samples.begin(),
                  samples.end() - static_cast<std::ptrdiff_t>(config.max_windows));
  }

  Rng rng(config.seed);
  const int h = config.hidden;
  auto& w1 = model.w1();
  auto& w2 = model.w2();
  w1.resize(static_cast<std::size_t>(h) * w);
  w2.resize(h);
  for (auto& v : w1) v = rng.uniform(-0.5, 2.0) / static_cast<double>(w);
  for (auto& v : w2) v = rng.uniform(0.5, 1.5) / static_cast<double>(h);
  if (samples.empty()) return model;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> g1(w1.size());
  std::vector<double> g2(w2.size());
  std::vector<double> act(h);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      std::fill(g1.begin(), g1.end(), 0.0);
      std::fill(g2.begin(), g2.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const Sample& s = samples[order[b]];
        double out = 0.0;
        for (int j = 0; j < h; ++j) {
          double a = 0.0;
          for (std::size_t k = 0; k < w; ++k) a += w1[j * w + k] * s.x[k];
          act[j] = a > 0.0 ? a : 0.0;
          out += w2[j] * act[j];
        }
        const double err = out - s.y;
        for (int j = 0; j < h; ++j) {
          g2[j] += err * act[j];
          if (act[j] > 0.0) {
            for (std::size_t k = 0; k < w; ++k) {
              g1[j * w + k] += err * w2[j] * s.x[k];
            }
          }
        }
      }
      const double scale =
          config.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < w1.size(); ++i) w1[i] -= scale * g1[i];
      // Non-negative output weights keep every forecast >= 0.
      for (int j = 0; j < h; ++j) w2[j] = std::max(0.0, w2[j] - scale * g2[j]);
    }
  }
  return model;
}

ActivityForecast predict_active(const ForecasterModel& model,
                                const std::vector<double>& cpu_history) {
  const auto w = static_cast<std::size_t>(model.window());
  ActivityForecast out;
  std::vector<double> x(w, 0.0);
  if (cpu_history.size() < w) {
    out.padded = true;
    std::copy(cpu_history.begin(), cpu_history.end(),
              x.begin() + static_cast<std::ptrdiff_t>(w - cpu_history.size()));
  } else {
    std::copy(cpu_history.end() - static_cast<std::ptrdiff_t>(w),
              cpu_history.end(), x.begin());
  }
  out.w_p = std::max(0.0, model.raw(x));
  out.active = out.w_p > 0.0;
  return out;
}

json forecaster_to_json(const ForecasterModel& model) {
  const auto& c = model.config();
  return {{"format", "cloudrisk-forecaster"},
          {"version", 1},
          {"kind", c.kind == ForecasterKind::kFeedForward ? "feed-forward"
                                                          : "exponential-smoothing"},
          {"window", c.window},
          {"hidden", c.hidden},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"learning_rate", c.learning_rate},
          {"smoothing_alpha", c.smoothing_alpha},
          {"max_windows", c.max_windows},
          {"seed", c.seed},
          {"w1", model.w1()},
          {"w2", model.w2()}};
}

ForecasterModel forecaster_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "cloudrisk-forecaster") {
      throw InputError("document is not a forecaster model");
    }
    const int version = doc.at("version").get<int>();
    if (version != 1) throw VersionError("forecaster model", version, 1);
    ForecasterConfig c;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "feed-forward") {
      c.kind = ForecasterKind::kFeedForward;
    } else if (kind == "exponential-smoothing") {
      c.kind = ForecasterKind::kExponentialSmoothing;
    } else {
      throw InputError("unknown forecaster kind '" + kind + "'");
    }
    c.window = doc.at("window").get<int>();
    c.hidden = doc.at("hidden").get<int>();
    c.epochs = doc.at("epochs").get<int>();
    c.batch = doc.at("batch").get<int>();
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.smoothing_alpha = doc.at("smoothing_alpha").get<double>();
    c.max_windows = doc.at("max_windows").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    ForecasterModel m(c);
    m.w1() = doc.at("w1").get<std::vector<double>>();
    m.w2() = doc.at("w2").get<std::vector<double>>();
    if (c.kind == ForecasterKind::kFeedForward &&
        (m.w1().size() != static_cast<std::size_t>(c.hidden * c.window) ||
         m.w2().size() != static_cast<std::size_t>(c.hidden))) {
      throw InputError("forecaster weights do not match the layer sizes");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed forecaster document: ") + e.what());
  }
}

}  // namespace cloudrisk
