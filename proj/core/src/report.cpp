#include "cwkit/report.hpp"

#include <json.hpp>

namespace cwkit {
namespace {

using Json = nlohmann::ordered_json;

Json coords(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

Json carleman_json(const CarlemanReport& r) {
  Json j;
  j["order"] = r.order;
  j["verdict"] = std::string(to_string(r.verdict));
  j["reason"] = r.reason;
  j["reliable"] = r.reliable;
  j["slope_statistic"] = r.slope_statistic;
  j["final_partial_sum"] = r.partial_sums.empty() ? Json(nullptr) : Json(r.partial_sums.back());
  j["terms"] = r.terms;
  j["partial_sums"] = r.partial_sums;
  return j;
}

Json frame_json(const Frame& f) {
  Json j;
  Json dirs = Json::array();
  for (const auto& u : f.directions()) dirs.push_back(coords(u.coords()));
  j["directions"] = std::move(dirs);
  j["min_singular_value"] = f.min_singular_value();
  j["frame_constant"] = frame_constant(f);
  return j;
}

Json tightness_json(const TightnessBox& b) {
  Json j;
  j["epsilon"] = b.epsilon;
  j["frame"] = frame_json(b.frame);
  j["half_widths"] = b.half_widths;
  j["achieved_coverage"] = b.achieved_coverage;
  return j;
}

Json config_json(const VerdictConfig& c) {
  Json j;
  j["region"] = c.region.describe();
  j["region_positive_measure"] = c.region.has_positive_measure();
  j["n_directions"] = c.n_directions;
  j["metric"] = std::string(to_string(c.metric));
  j["h1_tolerance"] = c.h1_tolerance ? Json(*c.h1_tolerance) : Json("auto: 1.36/sqrt(n_min) + 0.01");
  j["h1_rule"] = std::string(to_string(c.h1_rule));
  j["carleman_order"] = c.carleman_order;
  j["moment_order"] = c.moment_order;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["frame_tau"] = c.frame_tau;
  j["reference_size"] = c.reference_size;
  j["max_draw_budget"] = c.max_draw_budget;
  j["moment_tolerances"] = c.moment_tolerances.empty() ? Json("auto") : Json(c.moment_tolerances);
  j["moment_z"] = c.moment_z;
  return j;
}

Json digest_json(const InputDigest& d) {
  Json j;
  j["label"] = d.label;
  j["kind"] = d.kind;
  j["rows"] = d.rows;
  j["dim"] = d.dim;
  j["digest"] = d.digest;
  return j;
}

}  // namespace

std::string to_json(const VerdictReport& r) {
  Json j;
  j["overall_verdict"] = std::string(to_string(r.overall));
  j["flags"] = r.flags;
  j["dim"] = r.dim;

  Json h1;
  h1["rule"] = std::string(to_string(r.config.h1_rule));
  h1["metric"] = std::string(to_string(r.config.metric));
  h1["tolerance"] = r.h1_tolerance;
  h1["passed"] = std::count_if(r.h1.begin(), r.h1.end(), [](const H1Outcome& o) { return o.pass; });
  h1["total"] = r.h1.size();
  Json dirs = Json::array();
  for (std::size_t i = 0; i < r.h1.size(); ++i) {
    Json d;
    d["id"] = r.h1[i].direction_id;
    d["direction"] = coords(r.directions[i].coords());
    d["pass"] = r.h1[i].pass;
    d["reason"] = r.h1[i].reason;
    d["final_distance"] = r.h1[i].final_distance;
    d["kendall_tau"] = r.h1[i].kendall_tau;
    Json trace = Json::array();
    for (const auto& e : r.traces[i].entries) trace.push_back(Json::array({e.index, e.sample_size, e.distance}));
    d["trace"] = std::move(trace);
    dirs.push_back(std::move(d));
  }
  h1["directions"] = std::move(dirs);
  j["h1"] = std::move(h1);

  Json h2;
  h2["frame"] = r.frame ? frame_json(*r.frame) : Json(nullptr);
  Json reports = Json::array();
  for (const auto& c : r.carleman) reports.push_back(carleman_json(c));
  h2["carleman"] = std::move(reports);
  j["h2"] = std::move(h2);

  j["tightness"] = r.tightness ? tightness_json(*r.tightness) : Json(nullptr);

  Json moments = Json::array();
  for (const auto& m : r.moments) {
    Json row;
    row["order"] = m.order;
    row["max_abs_discrepancy"] = m.max_abs_discrepancy;
    row["threshold"] = m.threshold;
    row["worst_index"] = std::vector<int>(m.worst_index.exponents().begin(), m.worst_index.exponents().end());
    row["pass"] = m.pass;
    moments.push_back(std::move(row));
  }
  j["moments"] = std::move(moments);

  Json prov;
  prov["config"] = config_json(r.config);
  Json seq = Json::array();
  for (const auto& d : r.sequence_digests) seq.push_back(digest_json(d));
  prov["sequence"] = std::move(seq);
  prov["target"] = digest_json(r.target_digest);
  j["provenance"] = std::move(prov);
  return j.dump(2) + "\n";
}

std::string to_json(const CarlemanReport& report) { return carleman_json(report).dump(2) + "\n"; }

std::string to_json(const TightnessBox& box) { return tightness_json(box).dump(2) + "\n"; }

std::string to_json(const Reconstruction& rec) {
  Json j;
  j["order"] = rec.order;
  j["rank"] = rec.rank;
  j["condition_number"] = rec.condition_number;
  j["residual_norm"] = rec.residual_norm;
  Json coeffs = Json::array();
  for (std::size_t k = 0; k < rec.indices.size(); ++k) {
    Json c;
    c["alpha"] = std::vector<int>(rec.indices[k].exponents().begin(), rec.indices[k].exponents().end());
    c["value"] = rec.coefficients[k];
    coeffs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coeffs);
  return j.dump(2) + "\n";
}

std::string error_json(const Error& error) {
  Json j;
  j["error"] = std::string(to_string(error.kind()));
  j["message"] = error.what();
  Json ctx = Json::object();
  for (const auto& [k, v] : error.context()) ctx[k] = v;
  j["context"] = std::move(ctx);
  return j.dump();
}

}  // namespace cwkit
