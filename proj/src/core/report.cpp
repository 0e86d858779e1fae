#include "core/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/cookie.hpp"
#include "core/error.hpp"
#include "core/frog.hpp"
#include "core/processes.hpp"

namespace arrec::harness {

namespace fs = std::filesystem;

namespace {

Json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json trace_json(const std::vector<cls::TracePoint>& trace, double from = 0.0) {
  Json arr = Json::array();
  for (const auto& p : trace) {
    if (p.n >= from) arr.push_back({num(p.n), num(p.value)});
  }
  return arr;
}

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(num(x));
  return arr;
}

Json anchors_json(const std::vector<cls::AnchorResult>& anchors) {
  Json arr = Json::array();
  for (const auto& a : anchors) {
    Json j{{"y", num(a.y)}};
    if (a.zero_anchor) {
      j["outcome"] = "ZeroAnchor";
    } else {
      j["outcome"] = cls::to_string(a.outcome);
      j["raabe_limit"] = num(a.raabe_limit);
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

Json sufficient_json(const cls::SufficientReport& s) {
  return {{"result", cls::to_string(s.result)},
          {"liminf", num(s.liminf)},
          {"limsup", num(s.limsup)},
          {"lambda", num(s.lambda)}};
}

dist::InnovationLaw integer_part(const dist::InnovationLaw& law) {
  if (law.integer_valued()) return law;
  if (law.kind() == dist::Kind::ScaledVector) {
    return dist::InnovationLaw::scaled_vector(dist::InnovationLaw::floor_of(*law.inner()), law.dim());
  }
  return dist::InnovationLaw::floor_of(law);
}

std::string csv_row(const std::vector<double>& values) {
  std::string row;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) row += ',';
    row += format_number(values[i]);
  }
  row += '\n';
  return row;
}

std::string indexed_header(const std::string& prefix, std::size_t d) {
  std::string h;
  for (std::size_t i = 1; i <= d; ++i) h += "," + prefix + std::to_string(i);
  return h;
}

Json meta_json(const Scenario& sc, const std::string& command, std::optional<std::uint64_t> seed) {
  Json meta{{"command", command}, {"version", kVersion}, {"config", sc.raw}};
  meta["seed"] = seed ? Json(*seed) : Json(sc.probe.seed);
  return meta;
}

RunOutput finish(const Json& report, const Json& meta, std::vector<OutputFile> extra = {}) {
  RunOutput out;
  out.files.push_back({"report.json", dump(report)});
  out.files.push_back({"meta.json", dump(meta)});
  for (auto& f : extra) out.files.push_back(std::move(f));
  return out;
}

cls::Verdict scan(const Scenario& sc, const std::function<cls::Verdict(double)>& at) {
  return cls::anchor_scan_with(at, sc.classifier.y_grid);
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json verdict_json(const cls::Verdict& v) {
  Json j{{"outcome", cls::to_string(v.outcome)},
         {"rationale", v.rationale},
         {"raabe_limit", num(v.raabe_limit)},
         {"raabe_trace", trace_json(v.raabe_trace)},
         {"partial_log", trace_json(v.partial_log)},
         {"anchors", anchors_json(v.anchors)},
         {"flags", v.flags},
         {"lambda", num(v.lambda)},
         {"lambda_source", v.lambda_source}};
  const double last = v.raabe_trace.empty() ? 0.0 : v.raabe_trace.back().n / 10.0;
  j["raabe_tail"] = trace_json(v.raabe_trace, last);
  if (v.bertrand_gamma) {
    j["bertrand_gamma"] = num(*v.bertrand_gamma);
    j["bertrand_se"] = num(v.bertrand_se.value_or(0.0));
  }
  return j;
}

Json tail_class_json(const dist::TailClass& tc) {
  return {{"log_moment", dist::to_string(tc.log_moment)},
          {"regularity", dist::to_string(tc.reg)},
          {"limsup", num(tc.limsup)},
          {"liminf", num(tc.liminf)}};
}

Json probe_json(const ProbeReport& r) {
  Json j{{"hint", to_string(r.hint)}, {"divergence_fraction", num(r.divergence_fraction)}};
  if (r.runs > 0) {
    j["runs"] = r.runs;
    j["untruncated_fraction"] = num(r.untruncated_fraction);
    j["mean_woken"] = num(r.mean_woken);
    return j;
  }
  j["b_grid"] = vector_json(r.b_grid);
  j["checkpoints"] = r.checkpoints;
  j["mean_visits"] = vector_json(r.mean_visits);
  j["mean_visits_curve"] = vector_json(r.mean_visits_curve);
  j["growth_slope"] = num(r.growth_slope);
  j["growth_r2"] = num(r.growth_r2);
  j["mean_final_position"] = num(r.mean_final_position);
  j["overflow_replicas"] = r.overflow_replicas;
  return j;
}

Classification classify_scenario(const Scenario& sc) {
  const ProcessSpec& ps = sc.process;
  const dist::InnovationLaw& law = *ps.innovation;
  Classification out;
  out.json["process"] = to_string(ps.kind);
  out.json["innovation"] = law.describe();

  switch (ps.kind) {
    case ProcessKind::Ar:
    case ProcessKind::MaxAr:
    case ProcessKind::Branching: {
      const bool branching = ps.kind == ProcessKind::Branching;
      const dist::InnovationLaw lifted = law.lifted(ps.ensemble->dim());
      const dist::InnovationLaw used = branching ? integer_part(lifted) : lifted;
      cls::SeriesOptions opts = sc.classifier.series;
      if (branching) opts.positive_recurrence_shortcut = false;
      const cls::Verdict v = cls::classify_ar(*ps.ensemble, used, sc.classifier.y_grid, opts, sc.classifier.lyapunov);
      out.outcome = v.outcome;
      out.json["verdict"] = verdict_json(v);
      out.json["tail_class"] = tail_class_json(cls::effective_tail_class(used));
      out.json["sufficient_conditions"] = sufficient_json(cls::sufficient_conditions(cls::effective_tail_class(used), v.lambda));
      if (branching) {
        out.json["offspring"] = proc::to_string(ps.offspring);
        out.json["gamma2"] = num(proc::offspring_gamma2(ps.offspring, *ps.ensemble));
      }
      break;
    }
    case ProcessKind::Exchange: {
      const cls::Verdict v = scan(sc, [&](double y) {
        return cls::exchange_verdict(*ps.t_law, law, y, sc.classifier.series);
      });
      out.outcome = v.outcome;
      out.json["verdict"] = verdict_json(v);
      out.json["tail_class"] = tail_class_json(cls::effective_tail_class_linear(law));
      break;
    }
    case ProcessKind::Frog: {
      const cls::Verdict v = scan(sc, [&](double y) {
        return cls::frog_verdict(ps.frog_p, ps.frog_r, law, y, sc.classifier.series);
      });
      out.outcome = v.outcome;
      out.json["rho"] = num(proc::frog_rho(ps.frog_p, ps.frog_r));
      out.json["verdict"] = verdict_json(v);
      out.json["tail_class"] = tail_class_json(cls::effective_tail_class(law));
      break;
    }
    case ProcessKind::CookieWalk: {
      std::optional<cls::CookieVerdict> first;
      Json anchors = Json::array();
      for (double y : sc.classifier.y_grid) {
        if (!(y > 0.0)) continue;
        cls::CookieVerdict cv = cls::cookie_verdict(*ps.omega_law, law, y, sc.classifier.series);
        anchors.push_back({{"y", num(y)}, {"outcome", cls::to_string(cv.outcome)}});
        if (!first || first->outcome == cls::CookieOutcome::Inconclusive) {
          first = std::move(cv);
        } else if (cv.outcome != cls::CookieOutcome::Inconclusive && cv.outcome != first->outcome) {
          throw Error(ErrorCode::AnchorDisagreement, "cookie verdicts differ across anchors: " + anchors.dump());
        }
      }
      if (!first) throw Error(ErrorCode::ConfigError, "field 'classifier.y_grid' has no positive anchor");
      out.cookie = first->outcome;
      out.json["outcome"] = cls::to_string(first->outcome);
      out.json["mean_log_rho"] = num(first->mean_log_rho);
      out.json["verdict"] = verdict_json(first->series);
      out.json["anchors"] = anchors;
      out.json["tail_class"] = tail_class_json(cls::effective_tail_class(law));
      break;
    }
  }
  if (!out.json.contains("outcome") && out.outcome) out.json["outcome"] = cls::to_string(*out.outcome);
  return out;
}

RunOutput run_classify(const Scenario& sc) {
  const Classification c = classify_scenario(sc);
  Json report{{"command", "classify"}, {"scenario", sc.name}, {"classification", c.json}};
  return finish(report, meta_json(sc, "classify", std::nullopt));
}

RunOutput run_simulate(const Scenario& sc, std::uint64_t seed) {
  const ProcessSpec& ps = sc.process;
  const std::uint64_t steps = sc.simulate_steps;
  Stream rng(seed);
  Json summary{{"process", to_string(ps.kind)}, {"steps", steps}, {"seed", seed}};
  std::vector<OutputFile> files;

  switch (ps.kind) {
    case ProcessKind::Ar:
    case ProcessKind::MaxAr: {
      const proc::TrajectoryRecord rec = proc::simulate_ar(*ps.ensemble, *ps.innovation, steps, rng);
      const std::size_t d = rec.dim;
      std::string csv = "n" + indexed_header("x", d) + indexed_header("m", d) + indexed_header("nv", d) + ",env,norm\n";
      for (std::size_t n = 0; n < rec.norm.size(); ++n) {
        std::vector<double> row{static_cast<double>(n)};
        row.insert(row.end(), rec.x[n].begin(), rec.x[n].end());
        row.insert(row.end(), rec.m[n].begin(), rec.m[n].end());
        row.insert(row.end(), rec.nvec[n].begin(), rec.nvec[n].end());
        row.push_back(static_cast<double>(rec.env[n]));
        row.push_back(rec.norm[n]);
        csv += csv_row(row);
      }
      files.push_back({"trajectories/coupled.csv", std::move(csv)});
      summary["final_x"] = vector_json(rec.x.back());
      summary["final_m"] = vector_json(rec.m.back());
      summary["final_n"] = vector_json(rec.nvec.back());
      summary["coupling_order_held"] = true;
      break;
    }
    case ProcessKind::Branching: {
      const std::size_t d = ps.ensemble->dim();
      const dist::InnovationLaw lifted = ps.innovation->lifted(d);
      Vector y = lifted.sample_vector(rng);
      proc::ArChain chain(y);
      proc::BranchingState state = proc::branching_start(proc::floor_counts(y));
      std::string csv = "n" + indexed_header("z", d) + indexed_header("x", d) + ",env,norm\n";
      auto emit = [&](std::size_t n, long env_index) {
        std::vector<double> row{static_cast<double>(n)};
        double top = 0.0;
        for (auto c : state.z) {
          row.push_back(static_cast<double>(c));
          top = std::max(top, static_cast<double>(c));
        }
        row.insert(row.end(), chain.state().x.begin(), chain.state().x.end());
        row.push_back(static_cast<double>(env_index));
        row.push_back(top);
        csv += csv_row(row);
      };
      emit(0, -1);
      std::uint64_t done = 0;
      try {
        for (std::uint64_t n = 1; n <= steps; ++n) {
          const std::size_t idx = ps.ensemble->sample_index(rng);
          const Matrix& a = ps.ensemble->atoms()[idx].matrix;
          y = lifted.sample_vector(rng);
          chain.step(a, y);
          proc::branching_step(state, a, ps.offspring, proc::floor_counts(y), rng);
          emit(n, static_cast<long>(idx));
          done = n;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PopulationOverflow) throw;
        summary["population_overflow_at"] = done + 1;
      }
      files.push_back({"trajectories/branching.csv", std::move(csv)});
      summary["completed_steps"] = done;
      break;
    }
    case ProcessKind::Exchange: {
      proc::ExchangeState st{ps.innovation->sample(rng), 0};
      std::string csv = "n,t,w,r\n";
      csv += csv_row({0.0, 0.0, st.r, st.r});
      for (std::uint64_t n = 1; n <= steps; ++n) {
        const double t = ps.t_law->sample(rng);
        const double w = ps.innovation->sample(rng);
        st = proc::exchange_step(st, t, w);
        csv += csv_row({static_cast<double>(n), t, w, st.r});
      }
      files.push_back({"trajectories/exchange.csv", std::move(csv)});
      summary["final_r"] = num(st.r);
      break;
    }
    case ProcessKind::Frog: {
      proc::FrogConfig cfg;
      cfg.p = ps.frog_p;
      cfg.r = ps.frog_r;
      cfg.sleep_law = *ps.innovation;
      cfg.site_cap = ps.site_cap;
      cfg.wake_cap = ps.wake_cap;
      const proc::FrogOutcome o = proc::simulate_frog(cfg, rng);
      summary["woken_count"] = o.woken_count;
      summary["zero_visit_count"] = o.zero_visit_count;
      summary["frontier"] = o.frontier;
      summary["walk_steps"] = o.steps;
      summary["truncated"] = o.truncated;
      summary.erase("steps");
      break;
    }
    case ProcessKind::CookieWalk: {
      proc::CookieWalkConfig cfg;
      cfg.omega_law = *ps.omega_law;
      cfg.cookie_law = *ps.innovation;
      cfg.steps = steps;
      proc::CookieWalk walk(cfg);
      std::string csv = "n,position,cookies_consumed\n";
      csv += csv_row({0.0, 0.0, 0.0});
      for (std::uint64_t n = 1; n <= steps; ++n) {
        walk.step(rng);
        csv += csv_row({static_cast<double>(n), static_cast<double>(walk.position()),
                        static_cast<double>(walk.summary().cookies_consumed)});
      }
      files.push_back({"trajectories/cookie_walk.csv", std::move(csv)});
      const auto& s = walk.summary();
      summary["position"] = s.position;
      summary["min_position"] = s.min_position;
      summary["max_position"] = s.max_position;
      summary["returns_to_zero"] = s.returns_to_zero;
      summary["cookies_consumed"] = s.cookies_consumed;
      break;
    }
  }
  Json report{{"command", "simulate"}, {"scenario", sc.name}, {"summary", summary}};
  return finish(report, meta_json(sc, "simulate", seed), std::move(files));
}

RunOutput run_lyapunov(const Scenario& sc) {
  const ProcessSpec& ps = sc.process;
  if (!ps.ensemble) {
    throw Error(ErrorCode::ConfigError, std::string("field 'ensemble' is required for lyapunov; process kind ") +
                                            to_string(ps.kind) + " has none");
  }
  const env::MatrixEnsemble& ens = *ps.ensemble;
  Json result{{"dim", ens.dim()}, {"atoms", ens.atoms().size()}, {"norm_bound", num(ens.norm_bound())}};
  const env::LyapunovEstimate est = env::estimate_lyapunov(ens, sc.classifier.lyapunov);
  result["lambda_hat"] = num(est.lambda_hat);
  result["half_width"] = num(est.half_width);
  result["trajectory_length"] = est.trajectory_length;
  result["replicas"] = est.replicas;
  result["burn_in"] = est.burn_in;
  if (ens.dim() == 1) result["lambda_exact"] = num(env::scalar_lyapunov(ens));
  if (ens.is_constant()) {
    const Matrix a = ens.support().front();
    if (env::is_primitive(a)) {
      const env::PerronResult pr = env::spectral_radius(a);
      result["spectral_radius"] = num(pr.rho);
      result["lambda_exact"] = num(-std::log(pr.rho));
    } else {
      result["primitive"] = false;
    }
  }
  try {
    if (const auto w = env::find_pr(ens, 8)) {
      result["positive_product"] = {{"k", w->k}, {"kappa", num(w->kappa)}};
    } else {
      result["positive_product"] = nullptr;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SupportTooLarge) throw;
    result["positive_product"] = "enumeration_budget_exceeded";
  }
  Json report{{"command", "lyapunov"}, {"scenario", sc.name}, {"lyapunov", result}};
  return finish(report, meta_json(sc, "lyapunov", sc.classifier.lyapunov.seed));
}

RunOutput run_validate(const Scenario& sc) {
  const Classification c = classify_scenario(sc);
  const ProbeReport pr = probe(sc.process, sc.probe);
  AgreementRow row;
  if (c.cookie) {
    row = cookie_agreement(*c.cookie, pr);
  } else {
    row = agreement(*c.outcome, pr.hint);
  }
  Json report{{"command", "validate"},
              {"scenario", sc.name},
              {"classification", c.json},
              {"probe", probe_json(pr)},
              {"agreement", {{"classifier", row.classifier}, {"probe", row.probe}, {"status", to_string(row.status)}}}};
  RunOutput out = finish(report, meta_json(sc, "validate", std::nullopt));
  out.passed = row.status != AgreementStatus::Fail;
  return out;
}

void write_run_dir(const std::string& dir, const RunOutput& out) {
  try {
    const fs::path root(dir);
    for (const OutputFile& f : out.files) {
      const fs::path target = root / f.name;
      fs::create_directories(target.parent_path());
      const fs::path tmp = target.string() + ".tmp";
      {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
        os.write(f.data.data(), static_cast<std::streamsize>(f.data.size()));
        if (!os) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
      }
      fs::rename(tmp, target);
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoError, e.what());
  }
}

}  // namespace arrec::harness
