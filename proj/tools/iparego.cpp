#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <iparego/experiment.hpp>
#include <iparego/service.hpp>
#include <iparego/tricand.hpp>

namespace {

std::vector<Eigen::VectorXd> read_points(std::istream& is)
{
    std::vector<Eigen::VectorXd> pts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        for (char& c : line)
            if (c == ',')
                c = ' ';
        std::istringstream ls(line);
        std::vector<double> v;
        double t;
        while (ls >> t)
            v.push_back(t);
        if (!v.empty())
            pts.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return pts;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interactive multi-objective Bayesian optimization (TRIPE / WAPE)"};
    app.require_subcommand(1);

    iparego::ExperimentSpec spec;
    std::string method = "wape";
    std::uint64_t seed = 0;
    std::string out = "results";
    auto* run = app.add_subcommand("run", "benchmark against a simulated decision maker");
    run->add_option("--problem", spec.session.problem, "problem name")->capture_default_str();
    run->add_option("--din", spec.session.d_in, "input dimension")->capture_default_str();
    run->add_option("--dout", spec.session.d_out, "number of objectives")->capture_default_str();
    run->add_option("--method", method, "tripe or wape")->capture_default_str();
    run->add_option("--budget", spec.session.total_budget, "total budget in evaluations")->capture_default_str();
    run->add_option("--pspace", spec.session.p_space, "space-filling points (default 10*din)");
    run->add_option("--pinit", spec.session.p_init, "initial weighted rounds (default 10*dout)");
    run->add_option("--rho", spec.session.rho, "augmentation coefficient")->capture_default_str();
    run->add_option("--wape-n", spec.session.wape_n, "weights per WAPE step")->capture_default_str();
    run->add_option("--wape-eta", spec.session.wape_eta, "WAPE perturbation half-width")->capture_default_str();
    run->add_option("--cost-dm", spec.session.cost_dm, "budget charged per interaction")->capture_default_str();
    run->add_option("--reps", spec.repetitions, "repetitions")->capture_default_str();
    run->add_option("--seed", seed, "seed of repetition 0")->capture_default_str();
    run->add_option("--out", out, "output directory")->capture_default_str();

    std::string points_file;
    std::vector<double> lower, upper;
    auto* tri = app.add_subcommand("triangulate", "dump the Delaunay triangulation of a point file");
    tri->add_option("points", points_file, "whitespace or comma separated points, one per line")->required();
    tri->add_option("--lower", lower, "box lower bounds (default 0)");
    tri->add_option("--upper", upper, "box upper bounds (default 1)");

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string data_dir = "sessions";
    auto* serve = app.add_subcommand("serve", "host interactive sessions over HTTP");
    serve->add_option("--port", port, "listen port")->capture_default_str();
    serve->add_option("--host", host, "listen address")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "directory for session snapshots")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            spec.session.method = iparego::method_from_string(method);
            spec.seed_base = seed;
            spec.output_dir = out;
            const auto result = iparego::run_experiment(spec);
            const auto& last = result.aggregate.back();
            std::cout << "wrote " << result.runs.size() << " runs to " << out << "; final median OC "
                      << iparego::format_double(last.median) << '\n';
        } else if (*tri) {
            std::ifstream is(points_file);
            if (!is)
                throw iparego::Error(iparego::Errc::Io, "cannot read " + points_file);
            const auto pts = read_points(is);
            if (pts.empty())
                throw iparego::Error(iparego::Errc::TooFewPoints, "no points in " + points_file);
            const auto d = pts.front().size();
            Eigen::VectorXd lo = Eigen::VectorXd::Zero(d), hi = Eigen::VectorXd::Ones(d);
            if (!lower.empty())
                lo = Eigen::Map<Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
            if (!upper.empty())
                hi = Eigen::Map<Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));
            iparego::write_triangulation(std::cout, iparego::delaunay(pts, lo, hi));
        } else if (*serve) {
            iparego::service::Host service(data_dir);
            httplib::Server srv;
            service.bind(srv);
            std::cerr << "listening on " << host << ':' << port << " (" << service.ids().size() << " sessions restored)\n";
            if (!srv.listen(host, port))
                throw iparego::Error(iparego::Errc::Io, "cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const iparego::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
