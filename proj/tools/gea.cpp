// Copyright 2026 The Energy Arena Authors.
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


// Operator entry point: serve the arena, analyze vote logs, generate
// synthetic logs.

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "gea/api.hpp"
#include "gea/config.hpp"
#include "gea/metrics.hpp"
#include "gea/simulate.hpp"
#include "gea/store.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool split_host_port(const std::string& addr, std::string& host, int& port) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) return false;
  host = addr.substr(0, colon);
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) return false;
  } catch (const std::exception&) {
    return false;
  }
  return port > 0 && port <= 65535;
}

int run_serve(const std::string& config_path, const std::string& listen,
              const std::string& log_path) {
  gea::ArenaConfig config;
  try {
    config = gea::load_config(config_path);
  } catch (const gea::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!listen.empty()) config.listen_address = listen;
  if (!log_path.empty()) config.log_path = log_path;
  std::string host;
  int port = 0;
  if (!split_host_port(config.listen_address, host, port)) {
    std::cerr << "config error: listen address '" << config.listen_address
              << "' is not HOST:PORT\n";
    return kExitConfig;
  }

  // Signals go to a dedicated thread; every other thread inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<gea::ArenaService> service;
  try {
    service = std::make_unique<gea::ArenaService>(config);
  } catch (const gea::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  httplib::Server server;
  service->mount(server);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "error: cannot listen on " << config.listen_address << "\n";
    return kExitRuntime;
  }

  std::mutex mu;
  std::condition_variable cv;
  bool stopping = false;
  std::thread sweeper([&] {
    std::unique_lock lock(mu);
    while (!cv.wait_for(lock, std::chrono::seconds(30), [&] { return stopping; })) {
      service->sweep(gea::system_now());
    }
  });
  std::thread signal_waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });

  std::cerr << "serving " << config.registry.size() << " families on " << config.listen_address
            << ", log " << config.log_path.string() << "\n";
  const bool ok = server.listen_after_bind();

  {
    std::lock_guard lock(mu);
    stopping = true;
  }
  cv.notify_all();
  sweeper.join();
  // Wake the signal thread if the server stopped on its own.
  pthread_kill(signal_waiter.native_handle(), SIGTERM);
  signal_waiter.join();
  service.reset();  // closes the log
  return ok ? kExitOk : kExitRuntime;
}

int run_analyze(const std::string& log_path, const std::string& family,
                const std::string& format, bool strict) {
  try {
    auto result =
        gea::replay(log_path, strict ? gea::ReplayMode::kStrict : gea::ReplayMode::kLenient);
    for (const auto& w : result.warnings) {
      std::cerr << "warning: " << log_path << ":" << w.line << ": " << w.message << "\n";
    }
    gea::MetricsReport report = gea::build_report(result.records);
    if (!family.empty()) {
      const gea::ReportRow* row = report.find(family);
      gea::ReportRow only = row ? *row : gea::make_row(family, gea::RawTally{});
      if (format == "json") {
        std::cout << gea::to_json(only).dump(2) << "\n";
        return kExitOk;
      }
      // A one-family table still needs an aggregate slot; reuse the row.
      gea::MetricsReport single;
      single.aggregate = only;
      std::cout << gea::to_table(single);
      return kExitOk;
    }
    if (format == "json") {
      std::cout << gea::to_json(report).dump(2) << "\n";
    } else {
      std::cout << gea::to_table(report);
    }
    return kExitOk;
  } catch (const gea::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_validate(const std::string& log_path) {
  try {
    auto report = gea::validate_log(log_path);
    for (const auto& v : report.violations) {
      std::cout << log_path << ":" << v.line << ": " << v.message << "\n";
    }
    std::cerr << report.lines << " line(s), " << report.violations.size() << " violation(s)\n";
    return report.clean() ? kExitOk : kExitRuntime;
  } catch (const gea::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_simulate(std::uint64_t n, double wl, double ws, double t, const std::string& ec_list,
                 const std::string& families, std::uint64_t seed, const std::string& out) {
  gea::SimulationParams params;
  params.n = n;
  params.seed = seed;
  const auto ids = split_list(families);
  const auto ecs = split_list(ec_list);
  if (ids.empty()) {
    std::cerr << "usage error: --families is empty\n";
    return kExitUsage;
  }
  if (ecs.size() != 1 && ecs.size() != ids.size()) {
    std::cerr << "usage error: --ec takes one value or one per family\n";
    return kExitUsage;
  }
  try {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double ec = std::stod(ecs.size() == 1 ? ecs[0] : ecs[i]);
      params.families.push_back({ids[i], wl, ws, t, ec});
    }
  } catch (const std::exception&) {
    std::cerr << "usage error: --ec values must be numbers\n";
    return kExitUsage;
  }
  std::vector<gea::BattleRecord> records;
  try {
    records = gea::simulate_battles(params);
  } catch (const gea::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    gea::write_log(out, records);
  } catch (const gea::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << "wrote " << records.size() << " records to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware LLM arena"};
  app.require_subcommand(1);

  std::string config_path, listen, log_path;
  auto* serve = app.add_subcommand("serve", "Run the arena HTTP service");
  serve->add_option("--config", config_path, "Config file (JSON)")->required();
  serve->add_option("--listen", listen, "HOST:PORT, overrides the config");
  serve->add_option("--log", log_path, "Vote log path, overrides the config");

  std::string analyze_log, family, format = "table";
  bool strict = false;
  auto* analyze = app.add_subcommand("analyze", "Compute metrics from a vote log");
  analyze->add_option("--log", analyze_log, "Vote log")->required();
  analyze->add_option("--family", family, "Report a single family");
  analyze->add_option("--format", format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  analyze->add_flag("--strict", strict, "Fail on the first malformed line");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-log", "Check every record invariant in a log");
  validate->add_option("--log", validate_path, "Vote log")->required();

  std::uint64_t n = 0, seed = 0;
  double wl = 0, ws = 0, t = 0;
  std::string ec = "0", families = "gpt-4o,gpt-4.1,claude-3.5,llama3", out;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic vote log");
  simulate->add_option("--n", n, "Number of battles")->required();
  simulate->add_option("--wl", wl, "Initial large-win probability")->required();
  simulate->add_option("--ws", ws, "Initial small-win probability")->required();
  simulate->add_option("--t", t, "Initial tie probability")->required();
  simulate->add_option("--ec", ec, "Back-down probability, one value or one per family")
      ->required();
  simulate->add_option("--families", families, "Comma-separated family ids");
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--out", out, "Output log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*serve) return run_serve(config_path, listen, log_path);
  if (*analyze) return run_analyze(analyze_log, family, format, strict);
  if (*validate) return run_validate(validate_path);
  if (*simulate) return run_simulate(n, wl, ws, t, ec, families, seed, out);
  return kExitUsage;
}
