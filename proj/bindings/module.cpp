// cloverlab._core: python access to the main operations (channel, games,
// arena, mixers, training and evaluation).

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "clover/harness.hpp"

namespace py = pybind11;
using namespace clover;

namespace {

harness::ExperimentConfig config_from_text(const std::string& text) {
  std::stringstream ss(text);
  return harness::ExperimentConfig::parse(ss, "<string>");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cooperative multi-agent Q-learning over a simulated wireless channel";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ContractError>(m, "ContractError");
  py::register_exception<ShapeError>(m, "ShapeError");

  // ---- channel ----
  py::class_<chan::ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("p_t", &chan::ChannelParams::p_t)
      .def_readwrite("k_ref", &chan::ChannelParams::k_ref)
      .def_readwrite("eta", &chan::ChannelParams::eta)
      .def_readwrite("d0", &chan::ChannelParams::d0)
      .def_readwrite("sigma_psi", &chan::ChannelParams::sigma_psi)
      .def_readwrite("delta0", &chan::ChannelParams::delta0)
      .def_readwrite("n0", &chan::ChannelParams::n0)
      .def_readwrite("theta_f", &chan::ChannelParams::theta_f)
      .def_readwrite("theta_r", &chan::ChannelParams::theta_r)
      .def_readwrite("p", &chan::ChannelParams::p)
      .def_readwrite("w", &chan::ChannelParams::w)
      .def_readwrite("slots", &chan::ChannelParams::s)
      .def_readwrite("cell_size", &chan::ChannelParams::cell_size);

  py::enum_<chan::DecodeOutcome>(m, "DecodeOutcome")
      .value("Decoded", chan::DecodeOutcome::Decoded)
      .value("DetectedNotDecoded", chan::DecodeOutcome::DetectedNotDecoded)
      .value("Missed", chan::DecodeOutcome::Missed);

  m.def(
      "received_power",
      [](const chan::ChannelParams& cp, double distance_m, int obstacles,
         uint64_t seed) {
        Rng rng(seed);
        return chan::received_power(cp, distance_m, obstacles, rng);
      },
      py::arg("params"), py::arg("distance_m"), py::arg("obstacles") = 0,
      py::arg("seed") = 0);
  m.def("decode", &chan::decode, py::arg("signal_dbm"), py::arg("interference_dbm"),
        py::arg("params"));

  // ---- experiment config ----
  py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("from_text", &config_from_text)
      .def_static("from_file", &harness::ExperimentConfig::parse_file)
      .def("set", [](harness::ExperimentConfig& cfg, const std::string& key,
                     const std::string& value) { cfg.apply(key, value, "<py>"); })
      .def("serialize", &harness::ExperimentConfig::serialize)
      .def("validate", &harness::ExperimentConfig::validate);

  // ---- training / evaluation ----
  m.def(
      "train",
      [](const harness::ExperimentConfig& cfg, const std::string& out_dir) {
        harness::run_experiment(cfg, out_dir);
      },
      py::arg("config"), py::arg("out_dir"), "one training run per config seed");

  m.def(
      "evaluate",
      [](const std::string& checkpoint, int episodes, bool forced_silent,
         uint64_t seed) {
        ad::ParamStore store;
        harness::ExperimentConfig cfg = harness::load_checkpoint(checkpoint, store);
        harness::EvalReport rep = harness::eval_policy(
            cfg, store, episodes, forced_silent, seed, nullptr, nullptr, nullptr);
        py::dict d;
        d["episodes"] = rep.episodes;
        d["mean_return"] = rep.mean_return;
        d["std_return"] = rep.std_return;
        d["mean_steps"] = rep.mean_steps;
        d["mean_comm_prob"] = rep.mean_comm_prob;
        d["returns"] = rep.returns;
        d["termination_steps"] = rep.termination_steps;
        d["per_step_comm"] = rep.per_step_comm;
        return d;
      },
      py::arg("checkpoint"), py::arg("episodes") = 100,
      py::arg("forced_silent") = false, py::arg("seed") = 12345);

  m.def(
      "speaker_consistency",
      [](const std::vector<std::vector<double>>& messages,
         const std::vector<int>& labels) {
        harness::ConsistencyResult res = harness::speaker_consistency(messages, labels);
        std::vector<std::vector<double>> matrix(res.cosine.rows);
        for (int i = 0; i < res.cosine.rows; ++i)
          for (int j = 0; j < res.cosine.cols; ++j)
            matrix[i].push_back(res.cosine.at(i, j));
        py::dict d;
        d["cosine"] = matrix;
        d["intra_mean"] = res.intra_mean;
        d["inter_mean"] = res.inter_mean;
        d["zero_norm_count"] = res.zero_norm_count;
        return d;
      },
      py::arg("messages"), py::arg("labels"));

  m.def(
      "calibrate",
      [](const harness::ExperimentConfig& cfg, int trials, const std::string& csv) {
        std::ofstream f(csv);
        harness::CalibrationResult res = harness::calibrate_channel(cfg, trials, f);
        py::dict d;
        d["corner_prr"] = res.corner_prr;
        d["corner_transmissions"] = res.corner_transmissions;
        d["in_band"] = res.in_band;
        return d;
      },
      py::arg("config"), py::arg("trials") = 10000, py::arg("csv") = "calibration.csv");

  // ---- raw environment rollout for inspection ----
  m.def(
      "random_rollout",
      [](const harness::ExperimentConfig& cfg, uint64_t seed) {
        arena::Arena a = harness::make_arena(cfg);
        RngPool pool{seed};
        Rng env = pool.stream("env"), ch = pool.stream("channel"),
            ex = pool.stream("explore");
        auto cur = a.reset(env);
        const int n = a.n_agents();
        double ret = 0.0;
        int steps = 0;
        bool done = false;
        while (!done) {
          std::vector<arena::AugmentedAction> joint(n);
          std::vector<std::vector<double>> msgs(n);
          for (int i = 0; i < n; ++i) {
            joint[i].game_action = static_cast<int>(ex.uniform_int(game::kGameActions));
            joint[i].comm = ex.bernoulli(0.5) ? 1 : 0;
            msgs[i].assign(cfg.arena.message_dim, 0.0);
          }
          auto next = a.step(joint, msgs, ch);
          ret += next.reward;
          done = next.done;
          ++steps;
        }
        py::dict d;
        d["steps"] = steps;
        d["return"] = ret;
        return d;
      },
      py::arg("config"), py::arg("seed") = 0);
}
