#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "latpri/construction.hpp"
#include "latpri/json_io.hpp"
#include "latpri/requirements.hpp"

using namespace latpri;

namespace {

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::InvariantViolation ? 3 : 2;
}

std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice requirement analysis and priority construction runner"};
  app.require_subcommand(1);

  std::string lattice_path, config_path, out_path;
  int m = -1, budget = 3000, usets = 1, max_elems = 6;
  bool as_json = false, as_dot = false;

  auto* analyze = app.add_subcommand("analyze", "requirement report for a lattice");
  analyze->add_option("--lattice", lattice_path)->required();
  analyze->add_flag("--json", as_json);

  auto* tree = app.add_subcommand("tree", "build and dump the priority tree");
  tree->add_option("--lattice", lattice_path)->required();
  tree->add_option("--m", m);
  tree->add_option("--u-sets", usets);
  tree->add_option("--budget", budget);
  tree->add_flag("--dot", as_dot);
  tree->add_flag("--json", as_json);

  auto* sim = app.add_subcommand("simulate", "run the construction from a config");
  sim->add_option("--config", config_path)->required();
  sim->add_option("--trace-out", out_path);

  auto* enumerate = app.add_subcommand("enumerate", "distributive lattices up to iso");
  enumerate->add_option("--max-elems", max_elems);
  enumerate->add_flag("--json", as_json);

  auto* dot = app.add_subcommand("dot", "DOT of the priority tree");
  dot->add_option("--lattice", lattice_path)->required();
  dot->add_option("--m", m);
  dot->add_option("--u-sets", usets);
  dot->add_option("--budget", budget);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      Lattice l = lattice_from_json(load_json_file(lattice_path));
      auto rep = requirement_report(l);
      if (as_json) {
        Json j;
        j["format"] = 1;
        j["text"] = rep.text;
        j["rmap_csv"] = rep.rmap_csv;
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << rep.text << rep.rmap_csv;
      }
    } else if (*tree || *dot) {
      Lattice l = lattice_from_json(load_json_file(lattice_path));
      IntervalTree it(l);
      TreeOptions opt;
      opt.m = m;
      opt.u_sets = usets;
      opt.node_budget = budget;
      PriorityTree t(it, opt);
      t.materialize_bfs();
      if (*dot || as_dot)
        std::cout << t.to_dot();
      else
        std::cout << tree_to_json(t).dump(2) << "\n";
    } else if (*sim) {
      SimConfig cfg = config_from_json(load_json_file(config_path),
                                       dirname_of(config_path));
      Simulator s(cfg);
      try {
        s.run();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvariantViolation) throw;
        std::cerr << "invariant violation: " << e.what() << "\n";
        std::cout << summary_to_json(s.summary()).dump(2) << "\n";
        return 3;
      }
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        for (const auto& ev : s.trace()) out << ev.line << "\n";
      }
      std::cout << summary_to_json(s.summary()).dump(2) << "\n";
      std::cout << s.final_state_json() << "\n";
    } else if (*enumerate) {
      int count = 0;
      enumerate_distributive_lattices(max_elems, [&](const Lattice& l) {
        ++count;
        if (as_json)
          std::cout << lattice_to_json(l).dump() << "\n";
        else
          std::cout << "lattice " << count << ": " << l.size()
                    << " elements, ji=" << l.ji().size() << "\n";
      });
      std::cout << "total " << count << "\n";
    }
  } catch (const Error& e) {
    std::cerr << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
