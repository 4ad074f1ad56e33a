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

#include "codesign/config.hpp"

#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "codesign/errors.hpp"
#include "codesign/parallel.hpp"
#include "codesign/tasks.hpp"

namespace codesign {

namespace {

// Wraps a YAML map section and complains about unknown keys, so a typo in
// a study config cannot pass silently.
class Section {
 public:
  Section(const YAML::Node& node, std::string name)
      : node_(node), name_(std::move(name)) {}

  template <typename T>
  void read(const char* key, T& out) {
    if (!node_.IsDefined() || !node_.IsMap()) return;
    seen_.insert(key);
    if (node_[key]) out = node_[key].as<T>();
  }

  void read_design(const char* key, DesignVector& out) {
    if (!node_.IsDefined() || !node_.IsMap()) return;
    seen_.insert(key);
    const YAML::Node sub = node_[key];
    if (!sub) return;
    if (!sub.IsMap()) {
      throw ConfigError(name_ + "." + key + " must be a map of components");
    }
    DesignParams p = out.to_vector();
    const auto& names = DesignVector::component_names();
    for (const auto& kv : sub) {
      const std::string comp = kv.first.as<std::string>();
      bool found = false;
      for (int i = 0; i < kDesignDim; ++i) {
        if (names[i] == comp) {
          p[i] = kv.second.as<double>();
          found = true;
          break;
        }
      }
      if (!found) {
        throw ConfigError("unknown design component '" + comp + "' in " +
                          name_ + "." + key);
      }
    }
    out = DesignVector::from_vector(p);
  }

  void finish() const {
    if (!node_.IsDefined() || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (seen_.find(key) == seen_.end()) {
        throw ConfigError("unknown key '" + key + "' in section " + name_);
      }
    }
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> seen_;
};

JouleTorque parse_joule(const std::string& s) {
  if (s == "total") return JouleTorque::kTotal;
  if (s == "friction") return JouleTorque::kFriction;
  throw ConfigError("joule_torque must be 'total' or 'friction', got " + s);
}

MechPower parse_mech(const std::string& s) {
  if (s == "output") return MechPower::kOutput;
  if (s == "friction") return MechPower::kFriction;
  throw ConfigError("mech_power must be 'output' or 'friction', got " + s);
}

}  // namespace

CodesignProblem RunConfig::make_problem() const {
  CodesignProblem p;
  p.baseline = baseline;
  p.bounds = bounds;
  p.model_config = model;
  p.task = task_library(task_name);
  p.ocp_config = ocp;
  p.solver_settings = solver;
  p.active_dims = active_dims_preset(dims);
  p.fd_epsilon_rel = fd_epsilon_rel;
  p.workers = effective_workers();
  p.max_outer = max_outer;
  p.max_inner = max_inner;
  p.max_linesearch = max_linesearch;
  p.merit_tol_rel = merit_tol_rel;
  p.grad_tol_scaled = grad_tol_scaled;
  p.constraint_tol = constraint_tol;
  return p;
}

int RunConfig::effective_workers() const {
  return workers > 0 ? workers : default_workers();
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;

  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read config " + path + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config root must be a map");

  const std::set<std::string> known_sections = {
      "run", "design", "model", "ocp", "solver", "upper", "cma", "sim"};
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (known_sections.find(key) == known_sections.end()) {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }

  {
    Section s(root["run"], "run");
    s.read("task", cfg.task_name);
    s.read("dims", cfg.dims);
    s.read("workers", cfg.workers);
    s.read("seed", cfg.seed);
    s.read("output_dir", cfg.output_dir);
    s.read("budget_seconds", cfg.budget_seconds);
    s.read("repeats", cfg.repeats);
    s.read("verify", cfg.run_verification);
    s.finish();
  }
  {
    Section s(root["design"], "design");
    s.read_design("baseline", cfg.baseline);
    s.read_design("lower", cfg.bounds.lower);
    s.read_design("upper", cfg.bounds.upper);
    s.finish();
  }
  {
    Section s(root["model"], "model");
    s.read("reference_leg_length", cfg.model.reference_leg_length);
    s.read("upper_leg_mass0", cfg.model.upper_leg_mass0);
    s.read("lower_leg_mass0", cfg.model.lower_leg_mass0);
    s.read("base_structural_mass", cfg.model.base_structural_mass);
    s.read("imu_mass", cfg.model.imu_mass);
    s.read("mb_mass", cfg.model.mb_mass);
    s.read("friction_coeff", cfg.model.friction_coeff);
    s.read("gravity", cfg.model.gravity);
    s.read("coulomb_friction", cfg.model.coulomb_friction);
    s.read("viscous_friction", cfg.model.viscous_friction);
    std::string joule = "total", mech = "output";
    s.read("joule_torque", joule);
    s.read("mech_power", mech);
    cfg.model.joule_torque = parse_joule(joule);
    cfg.model.mech_power = parse_mech(mech);
    s.finish();
  }
  {
    Section s(root["ocp"], "ocp");
    double q_base = cfg.ocp.weights.q_weights[0];
    double q_joints = cfg.ocp.weights.q_weights[3];
    double v_weight = cfg.ocp.weights.v_weights[0];
    double u_weight = cfg.ocp.weights.u_weights[0];
    s.read("q_weight_base", q_base);
    s.read("q_weight_joints", q_joints);
    s.read("v_weight", v_weight);
    s.read("u_weight", u_weight);
    cfg.ocp.weights.q_weights.head<3>().setConstant(q_base);
    cfg.ocp.weights.q_weights.tail<4>().setConstant(q_joints);
    cfg.ocp.weights.v_weights.setConstant(v_weight);
    cfg.ocp.weights.u_weights.setConstant(u_weight);
    s.read("force_weight_tangential", cfg.ocp.weights.force_weight_tangential);
    s.read("force_weight_normal", cfg.ocp.weights.force_weight_normal);
    s.read("cone_weight", cfg.ocp.weights.cone_weight);
    s.read("swing_weight", cfg.ocp.weights.swing_weight);
    s.read("touchdown_weight", cfg.ocp.weights.touchdown_weight);
    s.read("state_bound_weight", cfg.ocp.weights.state_bound_weight);
    s.read("goal_weight", cfg.ocp.weights.goal_weight);
    s.read("friction_margin", cfg.ocp.cone.margin);
    s.read("lambda_z_min", cfg.ocp.cone.lambda_z_min);
    s.read("lambda_z_max", cfg.ocp.cone.lambda_z_max);
    s.read("joint_limit", cfg.ocp.bounds.joint_limit);
    s.read("joint_vel_limit", cfg.ocp.bounds.joint_vel_limit);
    s.read("baumgarte_alpha", cfg.ocp.baumgarte_alpha);
    s.finish();
  }
  {
    Section s(root["solver"], "solver");
    s.read("max_iterations", cfg.solver.max_iterations);
    s.read("tol_expected_improvement", cfg.solver.tol_expected_improvement);
    s.read("tol_cost_change", cfg.solver.tol_cost_change);
    s.read("tol_gap", cfg.solver.tol_gap);
    s.read("reg_init", cfg.solver.reg_init);
    s.read("reg_max", cfg.solver.reg_max);
    s.finish();
  }
  {
    Section s(root["upper"], "upper");
    s.read("fd_epsilon_rel", cfg.fd_epsilon_rel);
    s.read("max_outer", cfg.max_outer);
    s.read("max_inner", cfg.max_inner);
    s.read("max_linesearch", cfg.max_linesearch);
    s.read("merit_tol_rel", cfg.merit_tol_rel);
    s.read("grad_tol_scaled", cfg.grad_tol_scaled);
    s.read("constraint_tol", cfg.constraint_tol);
    s.finish();
  }
  {
    Section s(root["cma"], "cma");
    s.read("pop_size", cfg.cma.pop_size);
    s.read("sigma0", cfg.cma.sigma0);
    s.read("max_evals", cfg.cma.max_evals);
    s.read("penalty_weight", cfg.cma.penalty_weight);
    s.read("stall_tol_rel", cfg.cma.stall_tol_rel);
    s.read("stall_generations", cfg.cma.stall_generations);
    s.finish();
  }
  {
    Section s(root["sim"], "sim");
    s.read("dt", cfg.sim.dt);
    s.read("ground_stiffness", cfg.sim.ground_stiffness);
    s.read("ground_damping", cfg.sim.ground_damping);
    s.read("tangential_v_reg", cfg.sim.tangential_v_reg);
    s.finish();
  }

  // Cross-field sanity.
  const TaskSpec task = task_library(cfg.task_name);
  if (cfg.sim.dt > task.dt / 5.0) {
    throw ConfigError("sim.dt must be at most a fifth of the planner step");
  }
  if (cfg.sim.ground_stiffness <= 0.0 || cfg.sim.ground_damping <= 0.0) {
    throw ConfigError("ground stiffness and damping must be positive");
  }
  const DesignParams lo = cfg.bounds.lower.to_vector();
  const DesignParams hi = cfg.bounds.upper.to_vector();
  if ((lo.array() > hi.array()).any()) {
    throw ConfigError("design bounds: lower exceeds upper");
  }
  if (cfg.cma.pop_size < 4) throw ConfigError("cma.pop_size must be >= 4");
  return cfg;
}

std::string dump_config(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "task" << YAML::Value << cfg.task_name;
  out << YAML::Key << "dims" << YAML::Value << cfg.dims;
  out << YAML::Key << "workers" << YAML::Value << cfg.workers;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  out << YAML::Key << "budget_seconds" << YAML::Value << cfg.budget_seconds;
  out << YAML::Key << "repeats" << YAML::Value << cfg.repeats;
  out << YAML::Key << "verify" << YAML::Value << cfg.run_verification;
  out << YAML::EndMap;

  auto emit_design = [&out](const char* key, const DesignVector& d) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    const DesignParams p = d.to_vector();
    const auto& names = DesignVector::component_names();
    for (int i = 0; i < kDesignDim; ++i) {
      out << YAML::Key << names[i] << YAML::Value << p[i];
    }
    out << YAML::EndMap;
  };
  out << YAML::Key << "design" << YAML::Value << YAML::BeginMap;
  emit_design("baseline", cfg.baseline);
  emit_design("lower", cfg.bounds.lower);
  emit_design("upper", cfg.bounds.upper);
  out << YAML::EndMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "reference_leg_length" << YAML::Value
      << cfg.model.reference_leg_length;
  out << YAML::Key << "upper_leg_mass0" << YAML::Value
      << cfg.model.upper_leg_mass0;
  out << YAML::Key << "lower_leg_mass0" << YAML::Value
      << cfg.model.lower_leg_mass0;
  out << YAML::Key << "base_structural_mass" << YAML::Value
      << cfg.model.base_structural_mass;
  out << YAML::Key << "imu_mass" << YAML::Value << cfg.model.imu_mass;
  out << YAML::Key << "mb_mass" << YAML::Value << cfg.model.mb_mass;
  out << YAML::Key << "friction_coeff" << YAML::Value
      << cfg.model.friction_coeff;
  out << YAML::Key << "gravity" << YAML::Value << cfg.model.gravity;
  out << YAML::Key << "coulomb_friction" << YAML::Value
      << cfg.model.coulomb_friction;
  out << YAML::Key << "viscous_friction" << YAML::Value
      << cfg.model.viscous_friction;
  out << YAML::Key << "joule_torque" << YAML::Value
      << (cfg.model.joule_torque == JouleTorque::kTotal ? "total" : "friction");
  out << YAML::Key << "mech_power" << YAML::Value
      << (cfg.model.mech_power == MechPower::kOutput ? "output" : "friction");
  out << YAML::EndMap;

  out << YAML::Key << "ocp" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "q_weight_base" << YAML::Value
      << cfg.ocp.weights.q_weights[0];
  out << YAML::Key << "q_weight_joints" << YAML::Value
      << cfg.ocp.weights.q_weights[3];
  out << YAML::Key << "v_weight" << YAML::Value << cfg.ocp.weights.v_weights[0];
  out << YAML::Key << "u_weight" << YAML::Value << cfg.ocp.weights.u_weights[0];
  out << YAML::Key << "force_weight_tangential" << YAML::Value
      << cfg.ocp.weights.force_weight_tangential;
  out << YAML::Key << "force_weight_normal" << YAML::Value
      << cfg.ocp.weights.force_weight_normal;
  out << YAML::Key << "cone_weight" << YAML::Value
      << cfg.ocp.weights.cone_weight;
  out << YAML::Key << "swing_weight" << YAML::Value
      << cfg.ocp.weights.swing_weight;
  out << YAML::Key << "touchdown_weight" << YAML::Value
      << cfg.ocp.weights.touchdown_weight;
  out << YAML::Key << "state_bound_weight" << YAML::Value
      << cfg.ocp.weights.state_bound_weight;
  out << YAML::Key << "goal_weight" << YAML::Value
      << cfg.ocp.weights.goal_weight;
  out << YAML::Key << "friction_margin" << YAML::Value << cfg.ocp.cone.margin;
  out << YAML::Key << "lambda_z_min" << YAML::Value
      << cfg.ocp.cone.lambda_z_min;
  out << YAML::Key << "lambda_z_max" << YAML::Value
      << cfg.ocp.cone.lambda_z_max;
  out << YAML::Key << "joint_limit" << YAML::Value
      << cfg.ocp.bounds.joint_limit;
  out << YAML::Key << "joint_vel_limit" << YAML::Value
      << cfg.ocp.bounds.joint_vel_limit;
  out << YAML::Key << "baumgarte_alpha" << YAML::Value
      << cfg.ocp.baumgarte_alpha;
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_iterations" << YAML::Value
      << cfg.solver.max_iterations;
  out << YAML::Key << "tol_expected_improvement" << YAML::Value
      << cfg.solver.tol_expected_improvement;
  out << YAML::Key << "tol_cost_change" << YAML::Value
      << cfg.solver.tol_cost_change;
  out << YAML::Key << "tol_gap" << YAML::Value << cfg.solver.tol_gap;
  out << YAML::Key << "reg_init" << YAML::Value << cfg.solver.reg_init;
  out << YAML::Key << "reg_max" << YAML::Value << cfg.solver.reg_max;
  out << YAML::EndMap;

  out << YAML::Key << "upper" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "fd_epsilon_rel" << YAML::Value << cfg.fd_epsilon_rel;
  out << YAML::Key << "max_outer" << YAML::Value << cfg.max_outer;
  out << YAML::Key << "max_inner" << YAML::Value << cfg.max_inner;
  out << YAML::Key << "max_linesearch" << YAML::Value << cfg.max_linesearch;
  out << YAML::Key << "merit_tol_rel" << YAML::Value << cfg.merit_tol_rel;
  out << YAML::Key << "grad_tol_scaled" << YAML::Value << cfg.grad_tol_scaled;
  out << YAML::Key << "constraint_tol" << YAML::Value << cfg.constraint_tol;
  out << YAML::EndMap;

  out << YAML::Key << "cma" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pop_size" << YAML::Value << cfg.cma.pop_size;
  out << YAML::Key << "sigma0" << YAML::Value << cfg.cma.sigma0;
  out << YAML::Key << "max_evals" << YAML::Value << cfg.cma.max_evals;
  out << YAML::Key << "penalty_weight" << YAML::Value
      << cfg.cma.penalty_weight;
  out << YAML::Key << "stall_tol_rel" << YAML::Value << cfg.cma.stall_tol_rel;
  out << YAML::Key << "stall_generations" << YAML::Value
      << cfg.cma.stall_generations;
  out << YAML::EndMap;

  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << cfg.sim.dt;
  out << YAML::Key << "ground_stiffness" << YAML::Value
      << cfg.sim.ground_stiffness;
  out << YAML::Key << "ground_damping" << YAML::Value
      << cfg.sim.ground_damping;
  out << YAML::Key << "tangential_v_reg" << YAML::Value
      << cfg.sim.tangential_v_reg;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace codesign
