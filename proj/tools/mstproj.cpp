// Command-line front end: project global types, verify systems of local
// types by bounded exploration, benchmark a corpus, and dump automata.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mstproj/automata.hpp"
#include "mstproj/corpus.hpp"
#include "mstproj/csm.hpp"
#include "mstproj/parse.hpp"
#include "mstproj/print.hpp"
#include "mstproj/project.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

mstproj::GlobalPtr load_global(const std::string& file) {
    mstproj::GlobalPtr g = mstproj::parse_global(read_file(file));
    std::vector<mstproj::ValidationIssue> issues = mstproj::validate(g);
    if (!issues.empty()) throw std::runtime_error(file + ": " + issues.front().detail);
    return g;
}

ordered_json failure_json(const mstproj::ProjectionFailure& f) {
    ordered_json j;
    j["role"] = f.role.name;
    j["kind"] = mstproj::to_string(f.kind);
    j["path"] = f.path;
    if (f.witness) j["witness"] = mstproj::to_string(*f.witness);
    j["detail"] = f.detail;
    return j;
}

int cmd_project(const std::string& file, const std::string& role, bool explain,
                const std::string& out_dir) {
    mstproj::GlobalPtr g = load_global(file);
    std::map<mstproj::Role, mstproj::ProjectionResult> results;
    if (!role.empty()) {
        results.emplace(mstproj::Role{role}, mstproj::project(g, mstproj::Role{role}));
    } else {
        for (auto& [r, res] : mstproj::project_all(g).per_role)
            results.emplace(r, std::move(res));
    }
    bool ok = true, gen = false;
    for (const auto& [r, res] : results) {
        ok = ok && res.ok();
        gen = gen || res.gen_merge_used;
    }
    if (ok) {
        fs::create_directories(out_dir);
        for (const auto& [r, res] : results) {
            std::ofstream out(fs::path(out_dir) / (r.name + ".lt"));
            out << mstproj::pretty(res.local()) << "\n";
        }
    }
    std::cout << "projectable: " << (ok ? "yes" : "no")
              << ", gen_merge_used: " << (gen ? "yes" : "no") << "\n";
    if (!ok && explain) {
        ordered_json report = ordered_json::array();
        for (const auto& [r, res] : results)
            if (res.failure) report.push_back(failure_json(*res.failure));
        std::cout << report.dump(2) << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_verify(const std::string& file, const std::string& locals_dir, size_t depth,
               size_t channel_bound) {
    mstproj::GlobalPtr g = load_global(file);
    std::map<mstproj::Role, mstproj::LocalPtr> locals;
    if (!locals_dir.empty()) {
        for (const auto& entry : fs::directory_iterator(locals_dir)) {
            if (entry.path().extension() != ".lt") continue;
            locals[mstproj::Role{entry.path().stem().string()}] =
                mstproj::parse_local(read_file(entry.path()));
        }
    } else {
        auto all = mstproj::project_all(g);
        if (!all.ok) {
            std::cout << "not projectable; nothing to verify\n";
            return 1;
        }
        for (const auto& [r, res] : all.per_role) locals[r] = res.local();
    }
    try {
        mstproj::Csm csm = mstproj::build_csm(locals);
        mstproj::ExplorationResult ex = mstproj::explore(csm, depth, channel_bound);
        if (!ex.deadlocks.empty()) {
            std::cout << "deadlock after: " << mstproj::to_string(ex.deadlocks[0].first) << "\n";
            return 2;
        }
        mstproj::FidelityReport rep = mstproj::fidelity_check(g, csm, depth, channel_bound);
        if (!rep.ok()) {
            const auto& cex = rep.superset_ok ? rep.subset_counterexamples
                                              : rep.superset_counterexamples;
            std::cout << "fidelity violation (" << (rep.superset_ok ? "system" : "global")
                      << " trace): " << mstproj::to_string(cex[0]) << "\n";
            return 3;
        }
        std::cout << "ok: no deadlocks, fidelity holds up to depth " << depth
                  << " with channel bound " << channel_bound
                  << (ex.truncated ? " (some sends pruned at the bound)" : "") << "\n";
        return 0;
    } catch (const mstproj::ExplosionGuard& e) {
        std::cout << "inconclusive: " << e.what() << "\n";
        return 4;
    }
}

int cmd_bench(const std::string& dir, const std::string& csv_path) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".gt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::ostringstream csv;
    csv << "name,ast_size,role_count,projectable,gen_merge_used,elapsed_ms\n";
    for (const auto& f : files) {
        mstproj::GlobalPtr g;
        try {
            g = load_global(f.string());
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
            continue;
        }
        std::vector<double> times;
        mstproj::ProjectAllResult res;
        for (int i = 0; i < 5; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            res = mstproj::project_all(g);
            auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        csv << f.stem().string() << "," << mstproj::ast_size(g) << ","
            << mstproj::roles_of(g).size() << "," << (res.ok ? "yes" : "no") << ","
            << (res.gen_merge_used ? "yes" : "no") << "," << times[times.size() / 2] << "\n";
    }
    if (csv_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(csv_path);
        out << csv.str();
    }
    return 0;
}

int cmd_dot(const std::string& file, const std::string& which) {
    mstproj::GlobalPtr g = load_global(file);
    if (which == "gaut") {
        std::cout << mstproj::to_dot(mstproj::gaut(g), "gaut");
        return 0;
    }
    if (which.rfind("laut:", 0) == 0) {
        mstproj::Role r{which.substr(5)};
        mstproj::ProjectionResult res = mstproj::project(g, r);
        if (!res.ok()) {
            std::cerr << "projection onto " << r.name << " failed\n";
            return 1;
        }
        std::cout << mstproj::to_dot(mstproj::laut(res.local(), r), "laut_" + r.name);
        return 0;
    }
    std::cerr << "--which must be 'gaut' or 'laut:ROLE'\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiparty session type projection and bounded verification"};
    app.require_subcommand(1);

    std::string file, role, out_dir = ".", locals_dir, csv_path, which, dir;
    bool explain = false;
    size_t depth = 12, channel_bound = 2;

    auto* project = app.add_subcommand("project", "project a global type onto its roles");
    project->add_option("file", file)->required();
    project->add_option("--role", role, "project a single role");
    project->add_flag("--explain", explain, "print JSON diagnostics on failure");
    project->add_option("--out", out_dir, "directory for the .lt outputs");

    auto* verify = app.add_subcommand("verify", "explore the induced system of machines");
    verify->add_option("file", file)->required();
    verify->add_option("--locals", locals_dir, "directory of .lt files to use instead");
    verify->add_option("--depth", depth, "letter-step exploration bound");
    verify->add_option("--channel-bound", channel_bound, "per-channel capacity for sends");

    auto* bench = app.add_subcommand("bench", "project every .gt in a directory, CSV output");
    bench->add_option("dir", dir)->required();
    bench->add_option("--csv", csv_path, "write CSV here instead of stdout");

    auto* dot = app.add_subcommand("dot", "dump an automaton in DOT format");
    dot->add_option("file", file)->required();
    dot->add_option("--which", which, "gaut or laut:ROLE")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (project->parsed()) return cmd_project(file, role, explain, out_dir);
        if (verify->parsed()) return cmd_verify(file, locals_dir, depth, channel_bound);
        if (bench->parsed()) return cmd_bench(dir, csv_path);
        if (dot->parsed()) return cmd_dot(file, which);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
