#include "acceptance.hpp"

#include "anisoft/anisotropy.hpp"
#include "anisoft/diffeo.hpp"
#include "anisoft/errors.hpp"
#include "anisoft/faadibruno.hpp"
#include "anisoft/families.hpp"
#include "anisoft/littlewood_paley.hpp"
#include "anisoft/local_means.hpp"
#include "anisoft/multipliers.hpp"
#include "anisoft/spaces.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace anisoft;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

/// A refusal the caller can fix: exit code 2.
struct Refusal : std::runtime_error {
    std::string kind, field;
    Refusal(std::string k, std::string f, const std::string& msg)
        : std::runtime_error(msg), kind(std::move(k)), field(std::move(f)) {}
};

/// Runs fn, tagging library usage errors with the option that caused them.
template <class F>
auto field(const std::string& name, F&& fn) -> decltype(fn()) {
    auto tag = [&](const std::string& msg) { return msg.rfind(name + ":", 0) == 0 ? msg : name + ": " + msg; };
    try {
        return fn();
    } catch (const PreconditionError&) {
        throw;
    } catch (const UsageError& e) {
        throw Refusal("config", name, tag(e.what()));
    } catch (const DomainError& e) {
        throw Refusal("config", name, tag(e.what()));
    } catch (const ConfigError& e) {
        throw Refusal("config", name, tag(e.what()));
    }
}

/// Option named in a CLI11 parse message ("--s: ..." or "... --s = ..."), else "arguments".
std::string option_in(const std::string& msg) {
    const auto at = msg.find("--");
    if (at == std::string::npos) return "arguments";
    auto end = at + 2;
    while (end < msg.size() && (std::isalnum(static_cast<unsigned char>(msg[end])) || msg[end] == '-')) ++end;
    return msg.substr(at + 2, end - at - 2);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string join(std::span<const double> v, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + fmt(v[i]);
    return s;
}

std::string resolution(const GridSpec& g) {
    std::string s;
    for (std::size_t j = 0; j < g.dim(); ++j) s += (j ? "x" : "") + std::to_string(g.points(j));
    return s;
}

// ---- shared options ---------------------------------------------------------

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    std::vector<int> grid;
    std::vector<double> lengths;
    double s = 1.0;
    std::vector<double> a{2, 1};
    std::vector<double> p{2, 2};
    double q = 2.0;
    std::string family;
    double radius = 3.5;
};

void add_io(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON file; keys are option names without dashes")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output path (stdout when absent)");
}
void add_grid(CLI::App* sub, Common& c) {
    sub->add_option("--grid", c.grid, "points per axis (one value for every axis)")->delimiter(',');
    sub->add_option("--lengths", c.lengths, "box lengths per axis")->delimiter(',');
}
void add_space(CLI::App* sub, Common& c, bool with_s = true) {
    if (with_s) sub->add_option("--s", c.s, "smoothness");
    sub->add_option("--a", c.a, "anisotropy weights")->delimiter(',');
    sub->add_option("--p", c.p, "integrability exponents per axis")->delimiter(',');
    sub->add_option("--q", c.q, "sequence exponent");
}

std::map<std::string, std::string>& family_defaults() {
    static std::map<std::string, std::string> m;
    return m;
}

void add_family(CLI::App* sub, Common& c, const std::string& def) {
    family_defaults()[sub->get_name()] = def;
    sub->add_option("--family", c.family, "gaussians:K, modes:K or random-band-limited:K (default " + def + ")");
    sub->add_option("--radius", c.radius, "band radius |xi|_a of random band-limited and mode families");
    sub->add_option("--seed", c.seed, "family seed; member i uses seed + i");
}

GridSpec make_grid(const Common& c, std::size_t n, int points, double length) {
    return field("grid", [&] {
        std::vector<int> pts = c.grid.empty() ? std::vector<int>(n, points) : c.grid;
        std::vector<double> len = c.lengths.empty() ? std::vector<double>(n, length) : c.lengths;
        if (pts.size() == 1) pts.assign(n, pts[0]);
        if (len.size() == 1) len.assign(n, len[0]);
        if (pts.size() != n || len.size() != n)
            throw UsageError("expected " + std::to_string(n) + " axes to match --a");
        return GridSpec(len, pts);
    });
}

AnisotropyVector make_a(const Common& c) { return field("a", [&] { return AnisotropyVector(c.a); }); }

SpaceParams make_space(const Common& c) {
    auto a = make_a(c);
    if (c.p.size() != a.size())
        throw Refusal("config", "p", "p: expected " + std::to_string(a.size()) + " exponents to match --a");
    return {c.s, a, field("p", [&] { return IntegrabilityVector(c.p, c.q); })};
}

FamilyDescriptor make_family_descriptor(const Common& c) {
    return field("family", [&] { return FamilyDescriptor::parse(c.family); });
}

/// Fills options not given on the command line from the JSON config.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    json cfg;
    try {
        std::ifstream is(path);
        cfg = json::parse(is);
    } catch (const json::exception& e) {
        throw Refusal("config", "config", std::string("config: ") + e.what());
    }
    if (!cfg.is_object()) throw Refusal("config", "config", "config: top level must be an object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw Refusal("config", key, key + ": not an option of " + sub->get_name());
        if (opt->count() > 0) continue;
        std::vector<std::string> tokens;
        auto scalar = [&](const json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
            if (v.is_number()) return v.dump();
            throw Refusal("config", key, key + ": expected a number, string or list");
        };
        if (value.is_array())
            for (const auto& v : value) tokens.push_back(scalar(v));
        else
            tokens.push_back(scalar(value));
        try {
            opt->clear();
            opt->add_result(tokens);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw Refusal("config", key, key + ": " + e.what());
        }
    }
}

class Output {
public:
    explicit Output(const std::string& path) : path_(path) {}
    std::ostringstream& stream() { return buf_; }
    void flush() {
        if (path_.empty()) {
            std::cout << buf_.str() << std::flush;
            return;
        }
        std::ofstream os(path_, std::ios::binary);
        if (!os) throw Refusal("config", "out", "out: cannot open " + path_);
        os << buf_.str();
    }

private:
    std::string path_;
    std::ostringstream buf_;
};

// ---- subcommands ------------------------------------------------------------

void run_aniso_dist(const Common& c, const std::vector<double>& x) {
    const auto a = make_a(c);
    if (x.size() != a.size()) throw Refusal("config", "x", "x: expected " + std::to_string(a.size()) + " coordinates");
    const double t = field("x", [&] { return aniso_distance(a, x); });
    Output out(c.out);
    out.stream() << "distance,residual\n" << fmt(t) << ',' << fmt(t > 0 ? aniso_residual(a, x, t) : 0.0) << '\n';
    out.flush();
}

void run_partition_check(const Common& c) {
    const auto a = make_a(c);
    const auto g = make_grid(c, a.size(), 64, 2 * kPi);
    const auto sys = field("grid", [&] { return build_partition(a, g); });
    const int J = sys.levels();
    const auto r = sys.radii();
    double dev = 0.0;
    long bad = 0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        double sum = 0.0;
        for (int j = 0; j <= J; ++j) {
            const double v = sys.symbol(j)[f];
            sum += v;
            const double lo = j == 0 ? 0.0 : std::ldexp(1.0, j - 1);
            const double hi = j == 0 ? 1.5 : 3.0 * std::ldexp(1.0, j - 1);
            if ((r[f] < lo || r[f] > hi) && v >= 1e-14) ++bad;
        }
        if (r[f] <= std::ldexp(1.0, J - 1)) dev = std::max(dev, std::abs(sum - 1.0));
    }
    Output out(c.out);
    out.stream() << "a,grid,levels,max_deviation,support_violations\n"
                 << join(a.weights(), ";") << ',' << resolution(g) << ',' << J << ',' << fmt(dev) << ',' << bad << '\n';
    out.flush();
}

void run_norm(const Common& c, const std::string& space, const std::string& input) {
    const auto sp = make_space(c);
    std::vector<GridFunction> members;
    if (!input.empty()) {
        members.push_back(field("input", [&] { return read_grid_file(input); }));
        if (members[0].spec().dim() != sp.a.size())
            throw Refusal("config", "input", "input: grid dimension differs from --a");
    } else {
        const auto g = make_grid(c, sp.a.size(), 64, 2 * kPi);
        members = field("family", [&] { return make_family(make_family_descriptor(c), g, sp.a, c.radius, c.seed); });
    }
    Output out(c.out);
    out.stream() << "id,level,value\n";
    for (std::size_t id = 0; id < members.size(); ++id) {
        const auto sys = field("grid", [&] { return build_partition(sp.a, members[id].spec()); });
        const auto uc = fft_forward(members[id]);
        auto row = [&](const std::string& level, double v) { out.stream() << id << ',' << level << ',' << fmt(v) << '\n'; };
        if (space == "H") {
            row("norm", h_norm(uc, sp.s, sp.a, sp.pq.p(), sys));
            row("tail", tail_fraction(sys, uc));
            continue;
        }
        const auto rep = space == "F" ? field("p", [&] { return f_norm_report(uc, sp, sys); }) : b_norm_report(uc, sp, sys);
        for (std::size_t j = 0; j < rep.level_norms.size(); ++j) row(std::to_string(j), rep.level_norms[j]);
        row("norm", rep.value);
        row("tail", rep.tail);
    }
    out.flush();
}

void run_lift_check(const Common& c, double r) {
    const auto sp = make_space(c);
    const auto g = make_grid(c, sp.a.size(), 32, 2 * kPi);
    const auto fd = make_family_descriptor(c);
    std::vector<MultiplierSymbol> ops{lambda_symbol(sp.a, r), xi_symbol(sp.a, r)};
    for (std::size_t k = 1; k <= sp.a.size(); ++k)
        ops.push_back(axis_power_symbol(sp.a, static_cast<int>(k), r / (2.0 * sp.a[k - 1])));
    Output out(c.out);
    out.stream() << "operator,resolution,min,max,count,roundtrip_error\n";
    for (const auto& spec : {g, g.refined(2)}) {
        const auto fam = field("family", [&] { return make_family(fd, spec, sp.a, c.radius, c.seed); });
        const auto sys = field("grid", [&] { return build_partition(sp.a, spec); });
        for (const auto& sym : ops) {
            const auto band = operator_ratio_experiment(fam, sym, sp, sys);
            double rt = 0.0;
            const auto inv = sym.reciprocal();
            for (const auto& u : fam) {
                const auto back = apply_multiplier(inv, multiply_spectrum(sym, fft_forward(u)));
                for (std::size_t i = 0; i < u.size(); ++i) rt = std::max(rt, std::abs(back[i] - u[i]) / u.max_abs());
            }
            out.stream() << sym.description() << ',' << resolution(spec) << ',' << fmt(band.min) << ',' << fmt(band.max)
                         << ',' << band.count << ',' << fmt(rt) << '\n';
        }
    }
    out.flush();
}

void ratio_table(Output& out, const GridSpec& spec, std::span<const double> lhs, std::span<const double> rhs) {
    for (std::size_t i = 0; i < lhs.size(); ++i)
        out.stream() << i << ',' << resolution(spec) << ',' << fmt(lhs[i]) << ',' << fmt(rhs[i]) << ','
                     << fmt(rhs[i] > 0 ? lhs[i] / rhs[i] : std::nan("")) << '\n';
}

void run_local_means(const Common& c, int N, double kernel_radius) {
    const auto sp = make_space(c);
    const auto g = make_grid(c, sp.a.size(), 32, 2 * kPi);
    const auto fd = make_family_descriptor(c);
    const auto kp = field("N", [&] { return build_kernels(N, kernel_radius, sp.a, g.refined(2)); });
    Output out(c.out);
    out.stream() << "id,resolution,lhs,rhs,ratio\n";
    for (const auto& spec : {g, g.refined(2)}) {
        const auto fam = field("family", [&] { return make_family(fd, spec, sp.a, c.radius, c.seed); });
        const auto sys = field("grid", [&] { return build_partition(sp.a, spec); });
        LocalMeansOptions opt;
        opt.sys = &sys;
        std::vector<double> lhs, rhs;
        for (const auto& u : fam) {
            lhs.push_back(local_means_norm(u, sp, kp, opt));
            rhs.push_back(f_norm(u, sp, sys));
        }
        ratio_table(out, spec, lhs, rhs);
    }
    out.flush();
}

void run_maximal(const Common& c, int N, std::vector<double> peetre, double psi_radius, double phi_radius,
                 const std::string& inequality) {
    const auto sp = make_space(c);
    const auto g = make_grid(c, sp.a.size(), 32, 2 * kPi);
    const auto fd = make_family_descriptor(c);
    if (peetre.empty()) peetre.assign(sp.a.size(), 1.0);
    if (peetre.size() != sp.a.size())
        throw Refusal("config", "peetre", "peetre: expected " + std::to_string(sp.a.size()) + " exponents");
    const MaximalParams mp{peetre};
    const auto kgrid = g.refined(4);
    const auto psi = field("psi-radius", [&] { return build_kernels(N, psi_radius, sp.a, kgrid); });
    const auto phi = field("phi-radius", [&] { return build_kernels(N, phi_radius, sp.a, kgrid); });
    const auto theta = field("a", [&] { return default_theta_set(sp.a.size()); });
    Output out(c.out);
    out.stream() << "id,resolution,lhs,rhs,ratio\n";
    long violations = 0;
    for (const auto& spec : {g, g.refined(2)}) {
        const auto fam = field("family", [&] { return make_family(fd, spec, sp.a, c.radius, c.seed); });
        const auto rep = maximal_inequality_experiment(fam, sp, mp, psi, phi, theta);
        violations += rep.domination_violations;
        std::vector<double> lhs, rhs;
        for (const auto& row : rep.rows) {
            lhs.push_back(inequality == "parameter" ? row.thm31_lhs : row.thm32_lhs);
            rhs.push_back(inequality == "parameter" ? row.thm31_rhs : row.thm32_rhs);
        }
        ratio_table(out, spec, lhs, rhs);
    }
    out.flush();
    std::cerr << "domination violations: " << violations << '\n';
}

void run_diffeo_invariance(const Common& c, const std::string& sigma_text) {
    const auto sp = make_space(c);
    const std::size_t n = sp.a.size();
    const auto g = make_grid(c, n, n <= 2 ? 128 : 32, 4 * kPi);
    const auto sigma = field("sigma", [&] { return parse_diffeomorphism(sigma_text, g.lengths()); });
    if (sigma.dim() != n) throw Refusal("config", "sigma", "sigma: dimension differs from --a");
    const auto fd = make_family_descriptor(c);
    const SpaceParams points[1] = {sp};
    Output out(c.out);
    out.stream() << "f_id,s,p,q,a,hypothesis_ok,ratio,resolution\n";
    for (const auto& spec : {g, g.refined(2)}) {
        const auto fam = field("family", [&] { return make_family(fd, spec, sp.a, c.radius, c.seed); });
        const auto table = invariance_experiment(fam, sigma, points);
        for (const auto& row : table.rows)
            out.stream() << row.f_id << ',' << fmt(sp.s) << ',' << join(sp.pq.p(), ";") << ',' << fmt(sp.pq.q()) << ','
                         << join(sp.a.weights(), ";") << ',' << (row.hypothesis_ok ? "true" : "false") << ','
                         << fmt(row.ratio) << ',' << resolution(spec) << '\n';
    }
    out.flush();
}

int run_faa_di_bruno(const Common& c, const std::vector<int>& gamma, int n, int m, bool verify) {
    Output out(c.out);
    if (verify) {
        const auto checks = verify_suite(4, 1e-2);
        out.stream() << "pair,gamma,formula,difference,relative_error\n";
        bool ok = true;
        for (const auto& ch : checks) {
            out.stream() << ch.pair << ',' << format_multi_index(ch.gamma) << ',' << fmt(ch.formula) << ','
                         << fmt(ch.difference) << ',' << fmt(ch.relative_error) << '\n';
            ok = ok && ch.relative_error <= 1e-6;
        }
        out.flush();
        return ok ? 0 : 1;
    }
    if (gamma.empty()) throw Refusal("config", "gamma", "gamma: required unless --verify is given");
    const std::size_t nn = n > 0 ? static_cast<std::size_t>(n) : gamma.size();
    const auto exp = field("gamma", [&] { return enumerate_terms(gamma, nn, static_cast<std::size_t>(m)); });
    for (const auto& t : exp.terms) out.stream() << to_string(t) << '\n';
    out.flush();
    return 0;
}

int run_report(const Common& c, std::vector<int> ids) {
    if (ids.empty())
        for (int i = 1; i <= acceptance::kCriteria; ++i) ids.push_back(i);
    for (int id : ids)
        if (id < 1 || id > acceptance::kCriteria)
            throw Refusal("config", "criteria", "criteria: " + std::to_string(id) + " is not a criterion number");
    json doc{{"criteria", json::array()}};
    bool all = true;
    for (const auto& r : acceptance::run(ids)) {
        doc["criteria"].push_back(
            {{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"summary", r.summary}, {"metrics", r.metrics}});
        all = all && r.passed;
    }
    doc["passed"] = all;
    Output out(c.out);
    out.stream() << doc.dump(2) << '\n';
    out.flush();
    return 0;
}

void refuse(const std::string& kind, const std::string& field_or_condition, const std::string& message) {
    json j{{"status", "refused"}, {"error", kind}};
    j[kind == "precondition" ? "condition" : "field"] = field_or_condition;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic function space experiments"};
    app.require_subcommand(1);
    Common c;

    auto* dist = app.add_subcommand("aniso-dist", "anisotropic distance |x|_a and the solver residual");
    std::vector<double> x;
    add_io(dist, c);
    dist->add_option("--a", c.a, "anisotropy weights")->delimiter(',');
    dist->add_option("--x", x, "point")->delimiter(',')->required();

    auto* part = app.add_subcommand("partition-check", "partition of unity and corona support on a grid");
    add_io(part, c);
    add_grid(part, c);
    part->add_option("--a", c.a, "anisotropy weights")->delimiter(',');

    auto* norm = app.add_subcommand("norm", "quasi-norm with per-level contributions");
    std::string space = "F", input;
    add_io(norm, c);
    add_grid(norm, c);
    add_space(norm, c);
    add_family(norm, c, "random-band-limited:1");
    norm->add_option("--space", space, "F, B or H")->check(CLI::IsMember({"F", "B", "H"}));
    norm->add_option("--input", input, "grid file (binary format, see README)")->check(CLI::ExistingFile);

    auto* lift = app.add_subcommand("lift-check", "boundedness ratio bands of the lift operators");
    double r = 2.5;
    add_io(lift, c);
    add_grid(lift, c);
    add_space(lift, c);
    add_family(lift, c, "random-band-limited:20");
    lift->add_option("--r", r, "lift order");

    auto* lm = app.add_subcommand("local-means-compare", "local-means norm against f_norm at two resolutions");
    int N = 2;
    double kernel_radius = 1.0;
    add_io(lm, c);
    add_grid(lm, c);
    add_space(lm, c);
    add_family(lm, c, "random-band-limited:30");
    lm->add_option("--N", N, "Laplacian power of the kernel")->check(CLI::Range(1, 3));
    lm->add_option("--kernel-radius", kernel_radius, "support radius of the base bump");

    auto* mx = app.add_subcommand("maximal-check", "Peetre maximal inequalities at two resolutions");
    std::vector<double> peetre;
    double psi_radius = 1.0, phi_radius = 0.6;
    std::string inequality = "inverse";
    add_io(mx, c);
    add_grid(mx, c);
    add_space(mx, c);
    add_family(mx, c, "random-band-limited:10");
    mx->add_option("--N", N, "Laplacian power of both kernels")->check(CLI::Range(1, 3));
    mx->add_option("--peetre", peetre, "Peetre exponents r_l (default 1 per axis)")->delimiter(',');
    mx->add_option("--psi-radius", psi_radius, "support radius of the kernel under test");
    mx->add_option("--phi-radius", phi_radius, "support radius of the comparison kernel");
    mx->add_option("--inequality", inequality, "inverse (psi^* vs psi_j * f) or parameter (sup over theta vs phi^*)")
        ->check(CLI::IsMember({"inverse", "parameter"}));

    auto* inv = app.add_subcommand("diffeo-invariance", "f_norm(f o sigma) / f_norm(f) at two resolutions");
    std::string sigma;
    add_io(inv, c);
    add_grid(inv, c);
    add_space(inv, c);
    add_family(inv, c, "gaussians:50");
    inv->add_option("--sigma", sigma, "name:key=v,..., e.g. shear:eps=0.1")->required();

    auto* fdb = app.add_subcommand("faa-di-bruno", "term list of the multivariate chain rule");
    std::vector<int> gamma;
    int fn = 0, fm = 1;
    bool verify = false;
    add_io(fdb, c);
    fdb->add_option("--gamma", gamma, "derivative multi-index")->delimiter(',');
    fdb->add_option("--n", fn, "inner dimension (default: length of gamma)");
    fdb->add_option("--m", fm, "outer dimension")->check(CLI::PositiveNumber);
    fdb->add_flag("--verify", verify, "run the finite-difference suite instead");

    auto* rep = app.add_subcommand("report", "acceptance criteria as JSON");
    std::vector<int> criteria;
    add_io(rep, c);
    rep->add_option("--criteria", criteria, "criterion numbers (default all)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        refuse("usage", option_in(e.what()), e.what());
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config(sub, c.config);
        const std::string name = sub->get_name();
        if (auto it = family_defaults().find(name); it != family_defaults().end() && c.family.empty())
            c.family = it->second;
        if (name == "aniso-dist") run_aniso_dist(c, x);
        else if (name == "partition-check") run_partition_check(c);
        else if (name == "norm") run_norm(c, space, input);
        else if (name == "lift-check") run_lift_check(c, r);
        else if (name == "local-means-compare") run_local_means(c, N, kernel_radius);
        else if (name == "maximal-check") run_maximal(c, N, peetre, psi_radius, phi_radius, inequality);
        else if (name == "diffeo-invariance") run_diffeo_invariance(c, sigma);
        else if (name == "faa-di-bruno") return run_faa_di_bruno(c, gamma, fn, fm, verify);
        else if (name == "report") return run_report(c, criteria);
        return 0;
    } catch (const Refusal& e) {
        refuse(e.kind, e.field, e.what());
        return 2;
    } catch (const PreconditionError& e) {
        refuse("precondition", e.condition(), e.what());
        return 2;
    } catch (const UsageError& e) {
        refuse("config", "arguments", e.what());
        return 2;
    } catch (const DomainError& e) {
        refuse("config", "arguments", e.what());
        return 2;
    } catch (const ConfigError& e) {
        refuse("config", "grid", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"status", "error"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}
