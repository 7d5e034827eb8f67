#include "tnqe/resources.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace tnqe {

std::int64_t cnot_count(int n, int d) {
  if (n < 2 || d < 0) throw PreconditionError("need n >= 2 and D >= 0");
  const std::int64_t N = n, D = d;
  return N * N + (16 * D - 1) * N - 16 * D;
}

std::int64_t layer_depth(int n, int d, bool ghz) {
  if (n < 1 || d < 0) throw PreconditionError("need n >= 1 and D >= 0");
  const std::int64_t N = n, D = d;
  return ghz ? 28 * N + 56 * D - 13 : 28 * N * D + 17;
}

double shots_per_h_element(double l1, double delta) {
  if (!(delta > 0)) throw PreconditionError("delta must be positive");
  if (!(l1 >= 0)) throw PreconditionError("l1 norm must be non-negative");
  return (l1 / delta) * (l1 / delta);
}

double shots_per_overlap(double delta) {
  if (!(delta > 0)) throw PreconditionError("delta must be positive");
  return 1.0 / (delta * delta);
}

ResourceReport estimate_resources(const ResourceInputs& in) {
  if (in.n_spatial < 1) throw PreconditionError("need at least one orbital");
  ResourceReport r;
  r.in = in;
  const int nq = 2 * in.n_spatial;
  r.cnots_per_circuit = cnot_count(nq, in.d_layers);
  r.qubits = nq + 1;
  r.qubits_ghz = nq + in.n_spatial;
  r.layer_depth = layer_depth(nq, in.d_layers, false);
  r.layer_depth_ghz = layer_depth(nq, in.d_layers, true);
  r.shots_per_h = shots_per_h_element(in.l1_norm, in.delta_h);
  r.shots_per_s = shots_per_overlap(in.delta_s);
  r.total_shots = 0.5 * in.qpu_calls * (r.shots_per_h + r.shots_per_s);
  r.total_cnots = r.total_shots * static_cast<double>(r.cnots_per_circuit);
  return r;
}

ResourceReport tally(const ConvergenceTrace& trace, const FermionIntegrals& ints, double delta_h, double delta_s,
                     int d_layers) {
  ResourceInputs in;
  in.n_spatial = ints.n_spatial;
  in.d_layers = d_layers;
  in.delta_h = delta_h;
  in.delta_s = delta_s;
  in.l1_norm = spatial_l1_norm(ints);
  if (!trace.rows.empty()) {
    in.qpu_calls = static_cast<double>(trace.rows.back().qpu_calls);
    in.batches = static_cast<double>(trace.rows.back().batches);
  }
  return estimate_resources(in);
}

ResourceReport published_schedule(int n_spatial, double l1, int sweeps, int d_layers, double delta_h, double delta_s) {
  ResourceInputs in;
  in.n_spatial = n_spatial;
  in.d_layers = d_layers;
  in.delta_h = delta_h;
  in.delta_s = delta_s;
  in.l1_norm = l1;
  in.qpu_calls = 5.6e5;
  in.batches = static_cast<double>(sweeps) * (n_spatial - 1);
  ResourceReport r = estimate_resources(in);
  r.published_schedule = true;
  return r;
}

std::string report_json(const ResourceReport& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["published_schedule"] = r.published_schedule;
  j["inputs"] = {{"n_spatial", r.in.n_spatial}, {"d_layers", r.in.d_layers}, {"delta_h", r.in.delta_h},
                 {"delta_s", r.in.delta_s},     {"l1_norm", r.in.l1_norm},   {"qpu_calls", r.in.qpu_calls},
                 {"batches", r.in.batches}};
  j["tnqe"] = {{"cnots_per_circuit", r.cnots_per_circuit},
               {"qubits", r.qubits},
               {"qubits_ghz", r.qubits_ghz},
               {"layer_depth", r.layer_depth},
               {"layer_depth_ghz", r.layer_depth_ghz},
               {"qpu_calls", r.in.qpu_calls},
               {"batches", r.in.batches},
               {"shots_per_h_element", r.shots_per_h},
               {"shots_per_s_element", r.shots_per_s},
               {"total_shots", r.total_shots},
               {"total_cnots", r.total_cnots}};
  const auto& u = r.uccsd;
  j["uccsd_cited"] = {{"cnots_per_circuit", u.cnots_per_circuit}, {"qubits", u.qubits},
                      {"layer_depth", u.layer_depth},             {"qpu_calls", u.qpu_calls},
                      {"batches", u.batches},                     {"delta", u.delta},
                      {"total_shots", u.total_shots},             {"total_cnots", u.total_cnots},
                      {"correlation_fraction", u.correlation_fraction}};
  return j.dump(1);
}

std::string report_table(const ResourceReport& r) {
  const auto& u = r.uccsd;
  std::ostringstream os;
  char buf[256];
  auto row = [&](int i, const char* name, const std::string& a, const std::string& b) {
    std::snprintf(buf, sizeof buf, "%d  %-24s %-22s %s\n", i, name, a.c_str(), b.c_str());
    os << buf;
  };
  auto e = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2e", v);
    return std::string(b);
  };
  auto pair = [&](const std::string& a, const std::string& b) { return a + " (" + b + ")"; };
  std::snprintf(buf, sizeof buf, "%-27s %-22s %s\n", "   metric", "TNQE", "VQE-UCCSD (cited)");
  os << buf;
  row(1, "CNOTs per circuit", e(double(r.cnots_per_circuit)), e(u.cnots_per_circuit));
  row(2, "Qubits (GHZ)", pair(std::to_string(r.qubits), std::to_string(r.qubits_ghz)), std::to_string(u.qubits));
  row(3, "Layer depth (GHZ)", pair(e(double(r.layer_depth)), e(double(r.layer_depth_ghz))), e(u.layer_depth));
  row(4, "QPU calls (batches)", pair(e(r.in.qpu_calls), e(r.in.batches)), pair(e(u.qpu_calls), e(u.batches)));
  row(5, "Noise tol. (overlap)", pair(e(r.in.delta_h), e(r.in.delta_s)), e(u.delta));
  row(6, "Total shots", e(r.total_shots), e(u.total_shots));
  row(7, "Total CNOTs", e(r.total_cnots), e(u.total_cnots));
  return os.str();
}

}  // namespace tnqe
