// Copyright 2026 The codesign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codesign/io.hpp"

#include <fstream>
#include <iomanip>

#include <yaml-cpp/yaml.h>

#include "codesign/errors.hpp"

namespace codesign {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

void emit_design_map(YAML::Emitter& out, const char* key,
                     const DesignVector& d) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  const DesignParams p = d.to_vector();
  const auto& names = DesignVector::component_names();
  for (int i = 0; i < kDesignDim; ++i) {
    out << YAML::Key << names[i] << YAML::Value << p[i];
  }
  out << YAML::EndMap;
}

DesignVector read_design_map(const YAML::Node& node) {
  DesignParams p = DesignVector{}.to_vector();
  const auto& names = DesignVector::component_names();
  for (int i = 0; i < kDesignDim; ++i) {
    if (node[names[i]]) p[i] = node[names[i]].as<double>();
  }
  return DesignVector::from_vector(p);
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "t,qx,qz,pitch,q_fh,q_fk,q_hh,q_hk,vx,vz,vpitch,v_fh,v_fk,v_hh,v_hk,"
         "u_fh,u_fk,u_hh,u_hk,lam_fx,lam_fz,lam_hx,lam_hz,defect_norm\n";
  const size_t n = traj.us.size();
  for (size_t k = 0; k <= n; ++k) {
    out << traj.knot_time[static_cast<Eigen::Index>(k)];
    for (int i = 0; i < kNumX; ++i) out << "," << traj.xs[k][i];
    if (k < n) {
      for (int i = 0; i < kNumU; ++i) out << "," << traj.us[k][i];
      for (int i = 0; i < 4; ++i) out << "," << traj.forces[k][i];
    } else {
      for (int i = 0; i < kNumU + 4; ++i) out << ",0";
    }
    out << "," << traj.defect_norms[static_cast<Eigen::Index>(k)] << "\n";
  }
}

void write_energy_csv(const std::string& path, const Trajectory& traj,
                      const ActuatorParams& act) {
  std::ofstream out = open_out(path);
  out << "t,motor_id,p_mech,p_joule,p_fric,p_elec\n";
  double e_mech = 0.0, e_joule = 0.0, e_fric_pos = 0.0, e_elec = 0.0;
  for (size_t k = 0; k < traj.us.size(); ++k) {
    const double dt = traj.knot_duration[static_cast<Eigen::Index>(k)];
    for (int m = 0; m < kNumU; ++m) {
      const PowerBreakdown p =
          power_terms(traj.us[k][m], traj.xs[k][kNumQ + 3 + m], act);
      out << traj.knot_time[static_cast<Eigen::Index>(k)] << "," << m << ","
          << p.mechanical << "," << p.joule << "," << p.friction << ","
          << p.electrical << "\n";
      e_mech += p.mechanical * dt;
      e_joule += p.joule * dt;
      e_fric_pos += std::max(p.friction, 0.0) * dt;
      e_elec += p.electrical * dt;
    }
  }
  out << traj.knot_time[traj.knot_time.size() - 1] << ",-1," << e_mech << ","
      << e_joule << "," << e_fric_pos << "," << e_elec << "\n";
}

void write_tracking_csv(const std::string& path,
                        const std::vector<SimSample>& samples) {
  std::ofstream out = open_out(path);
  out << "t,qx,qz,pitch,q_fh,q_fk,q_hh,q_hk,vx,vz,vpitch,v_fh,v_fk,v_hh,v_hk,"
         "u_fh,u_fk,u_hh,u_hk,f_fx,f_fz,f_hx,f_hz\n";
  for (const SimSample& s : samples) {
    out << s.t;
    for (int i = 0; i < 7; ++i) out << "," << s.q[i];
    for (int i = 0; i < 7; ++i) out << "," << s.v[i];
    for (int i = 0; i < 4; ++i) out << "," << s.u[i];
    for (int i = 0; i < 4; ++i) out << "," << s.ground[i];
    out << "\n";
  }
}

void write_result(const std::string& path, const CodesignResult& result) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << result.method;
  out << YAML::Key << "task" << YAML::Value << result.task_name;
  out << YAML::Key << "dims" << YAML::Value << result.dims;
  out << YAML::Key << "seed" << YAML::Value << result.seed;
  out << YAML::Key << "converged" << YAML::Value << result.converged;
  out << YAML::Key << "stop_reason" << YAML::Value << result.stop_reason;
  out << YAML::Key << "j_initial" << YAML::Value << result.j_initial;
  out << YAML::Key << "j_final" << YAML::Value << result.j_final;
  out << YAML::Key << "max_violation" << YAML::Value << result.max_violation;
  out << YAML::Key << "planner_calls" << YAML::Value << result.planner_calls;
  out << YAML::Key << "wall_time_s" << YAML::Value << result.wall_time_s;
  emit_design_map(out, "rho_initial", result.rho_initial);
  emit_design_map(out, "rho_opt", result.rho_opt);
  out << YAML::Key << "iterations" << YAML::Value << YAML::BeginSeq;
  for (const NlpIterationLog& it : result.iterations) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "i" << YAML::Value << it.iteration;
    out << YAML::Key << "outer" << YAML::Value << it.outer;
    out << YAML::Key << "j" << YAML::Value << it.j;
    out << YAML::Key << "merit" << YAML::Value << it.merit;
    out << YAML::Key << "viol" << YAML::Value << it.max_violation;
    out << YAML::Key << "step" << YAML::Value << it.step_norm_scaled;
    out << YAML::Key << "grad" << YAML::Value << it.grad_norm_scaled;
    out << YAML::Key << "nom" << YAML::Value << it.calls_nominal;
    out << YAML::Key << "fd" << YAML::Value << it.calls_fd;
    out << YAML::Key << "ls" << YAML::Value << it.calls_linesearch;
    out << YAML::Key << "t" << YAML::Value << it.time_s;
    out << YAML::Key << "best" << YAML::Value << it.best_so_far;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  std::ofstream file = open_out(path);
  file << out.c_str() << "\n";
}

CodesignResult read_result(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read result " + path + ": " + e.what());
  }
  CodesignResult r;
  r.method = root["method"].as<std::string>("");
  r.task_name = root["task"].as<std::string>("");
  r.dims = root["dims"].as<int>(0);
  r.seed = root["seed"].as<uint64_t>(0);
  r.converged = root["converged"].as<bool>(false);
  r.stop_reason = root["stop_reason"].as<std::string>("");
  r.j_initial = root["j_initial"].as<double>(0.0);
  r.j_final = root["j_final"].as<double>(0.0);
  r.max_violation = root["max_violation"].as<double>(0.0);
  r.planner_calls = root["planner_calls"].as<int>(0);
  r.wall_time_s = root["wall_time_s"].as<double>(0.0);
  if (root["rho_initial"]) r.rho_initial = read_design_map(root["rho_initial"]);
  if (root["rho_opt"]) r.rho_opt = read_design_map(root["rho_opt"]);
  for (const YAML::Node& it : root["iterations"]) {
    NlpIterationLog log;
    log.iteration = it["i"].as<int>(0);
    log.outer = it["outer"].as<int>(0);
    log.j = it["j"].as<double>(0.0);
    log.merit = it["merit"].as<double>(0.0);
    log.max_violation = it["viol"].as<double>(0.0);
    log.step_norm_scaled = it["step"].as<double>(0.0);
    log.grad_norm_scaled = it["grad"].as<double>(0.0);
    log.calls_nominal = it["nom"].as<int>(0);
    log.calls_fd = it["fd"].as<int>(0);
    log.calls_linesearch = it["ls"].as<int>(0);
    log.time_s = it["t"].as<double>(0.0);
    log.best_so_far = it["best"].as<double>(0.0);
    r.iterations.push_back(log);
  }
  return r;
}

void write_improvement_report(const std::string& path,
                              const ImprovementReport& report) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "j_plan_nominal" << YAML::Value << report.j_plan_nominal;
  out << YAML::Key << "j_plan_optimized" << YAML::Value
      << report.j_plan_optimized;
  out << YAML::Key << "j_sim_nominal" << YAML::Value << report.j_sim_nominal;
  out << YAML::Key << "j_sim_optimized" << YAML::Value
      << report.j_sim_optimized;
  out << YAML::Key << "improvement_plan" << YAML::Value
      << report.improvement_plan;
  out << YAML::Key << "improvement_sim" << YAML::Value
      << report.improvement_sim;
  out << YAML::Key << "discrepancy_rel" << YAML::Value
      << report.discrepancy_rel;
  out << YAML::Key << "discrepancy_pp" << YAML::Value << report.discrepancy_pp;
  out << YAML::Key << "same_sign" << YAML::Value << report.same_sign;
  out << YAML::Key << "flagged" << YAML::Value << report.flagged;
  out << YAML::Key << "kp_nominal" << YAML::Value << report.gains_nominal.kp;
  out << YAML::Key << "kd_nominal" << YAML::Value << report.gains_nominal.kd;
  out << YAML::Key << "kp_optimized" << YAML::Value
      << report.gains_optimized.kp;
  out << YAML::Key << "kd_optimized" << YAML::Value
      << report.gains_optimized.kd;
  out << YAML::EndMap;
  std::ofstream file = open_out(path);
  file << out.c_str() << "\n";
}

ImprovementReport read_improvement_report(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read report " + path + ": " + e.what());
  }
  ImprovementReport r;
  r.j_plan_nominal = root["j_plan_nominal"].as<double>(0.0);
  r.j_plan_optimized = root["j_plan_optimized"].as<double>(0.0);
  r.j_sim_nominal = root["j_sim_nominal"].as<double>(0.0);
  r.j_sim_optimized = root["j_sim_optimized"].as<double>(0.0);
  r.improvement_plan = root["improvement_plan"].as<double>(0.0);
  r.improvement_sim = root["improvement_sim"].as<double>(0.0);
  r.discrepancy_rel = root["discrepancy_rel"].as<double>(0.0);
  r.discrepancy_pp = root["discrepancy_pp"].as<double>(0.0);
  r.same_sign = root["same_sign"].as<bool>(false);
  r.flagged = root["flagged"].as<bool>(false);
  r.gains_nominal.kp = root["kp_nominal"].as<double>(0.0);
  r.gains_nominal.kd = root["kd_nominal"].as<double>(0.0);
  r.gains_optimized.kp = root["kp_optimized"].as<double>(0.0);
  r.gains_optimized.kd = root["kd_optimized"].as<double>(0.0);
  return r;
}

void write_study_csv(const std::string& path,
                     const std::vector<StudyRow>& rows) {
  std::ofstream out = open_out(path);
  out << "dimension,method,repeat,status,best_cost,time_to_99_s,"
         "planner_calls,iterations,calls_per_iteration,linesearch_calls,"
         "converged,wall_time_s\n";
  for (const StudyRow& r : rows) {
    out << r.dims << "," << r.method << "," << r.repeat << "," << r.status
        << "," << r.best_cost << "," << r.time_to_99_s << ","
        << r.planner_calls << "," << r.iterations << ","
        << r.calls_per_iteration << "," << r.linesearch_calls << ","
        << (r.converged ? 1 : 0) << "," << r.wall_time_s << "\n";
  }
}

}  // namespace codesign
