#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rieszlab/cantor.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/oracle.hpp"
#include "rieszlab/profiles.hpp"
#include "rieszlab/random.hpp"
#include "rieszlab/riesz.hpp"
#include "rieszlab/serialize.hpp"
#include "rieszlab/topcover.hpp"
#include "rieszlab/verify.hpp"

namespace rieszlab::cli {

namespace fs = std::filesystem;

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (grid_n < 8 || (grid_n & (grid_n - 1)) != 0)
        bad.push_back("grid.n must be a power of two >= 8");
    if (!(grid_L > 0.0)) bad.push_back("grid.L must be positive");
    if (measure_kind != "cantor" && measure_kind != "cantor-jitter" && measure_kind != "file")
        bad.push_back("measure.kind must be cantor, cantor-jitter or file");
    if (measure_kind != "file") {
        if (cantor_generations < 0) bad.push_back("measure.generations must be >= 0");
        if (!(cantor_kappa >= 1.0)) bad.push_back("measure.kappa must be >= 1");
        if (!(cantor_mass > 0.0)) bad.push_back("measure.mass must be positive");
    }
    if (a_max < 2 || (a_max & (a_max - 1)) != 0)
        bad.push_back("construction.A_max must be a power of two >= 2");
    ConstructionParams p = construction;
    p.s = s;
    if (p.half_mass <= 0.0) p.half_mass = 1.0; // auto-filled from the measure at load
    for (const std::string& msg : p.validate()) bad.push_back(msg);
    return bad;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "id=" << id << ";s=" << format_double(s) << ";seed=" << seed
       << ";L=" << format_double(grid_L) << ";n=" << grid_n << ";measure=" << measure_kind
       << ";g=" << cantor_generations << ";kappa=" << format_double(cantor_kappa)
       << ";mass=" << format_double(cantor_mass) << ";file=" << measure_file
       << ";N=" << construction.levels << ";eps=" << format_double(construction.eps)
       << ";M=" << format_double(construction.big_m)
       << ";delta=" << format_double(construction.delta)
       << ";m=" << format_double(construction.half_mass)
       << ";H=" << format_double(construction.cover_budget)
       << ";r_star=" << format_double(construction.r_star)
       << ";rho_star=" << format_double(construction.rho_star) << ";A_max=" << a_max
       << ";lambda_hat=" << format_double(lambda_hat)
       << ";lambda_abs=" << format_double(lambda_abs) << ";maxprin=" << maxprin_cases << ","
       << maxprin_v_cases << ";psi_cases=" << psi_corpus_cases;
    return os.str();
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line, section;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
    };
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        const std::string full = section.empty() ? key : section + "." + key;
        auto as_double = [&] { return std::stod(value); };
        auto as_int = [&] { return std::stoi(value); };
        if (full == "id") cfg.id = value;
        else if (full == "s") cfg.s = as_double();
        else if (full == "seed") cfg.seed = std::stoull(value);
        else if (full == "out") cfg.out_dir = value;
        else if (full == "grid.L") cfg.grid_L = as_double();
        else if (full == "grid.n") cfg.grid_n = as_int();
        else if (full == "measure.kind") cfg.measure_kind = value;
        else if (full == "measure.generations") cfg.cantor_generations = as_int();
        else if (full == "measure.kappa") cfg.cantor_kappa = as_double();
        else if (full == "measure.mass") cfg.cantor_mass = as_double();
        else if (full == "measure.file") cfg.measure_file = value;
        else if (full == "construction.N") cfg.construction.levels = as_int();
        else if (full == "construction.eps") cfg.construction.eps = as_double();
        else if (full == "construction.M") cfg.construction.big_m = as_double();
        else if (full == "construction.delta") cfg.construction.delta = as_double();
        else if (full == "construction.m") cfg.construction.half_mass = as_double();
        else if (full == "construction.H") cfg.construction.cover_budget = as_double();
        else if (full == "construction.r_star") cfg.construction.r_star = as_double();
        else if (full == "construction.rho_star") cfg.construction.rho_star = as_double();
        else if (full == "construction.A_max") cfg.a_max = as_int();
        else if (full == "construction.lambda_hat") cfg.lambda_hat = as_double();
        else if (full == "construction.lambda_abs") cfg.lambda_abs = as_double();
        else if (full == "construction.loss_constant") cfg.construction.loss_constant = as_double();
        else if (full == "corpus.psi_cases") cfg.psi_corpus_cases = as_int();
        else if (full == "corpus.maxprin_cases") cfg.maxprin_cases = as_int();
        else if (full == "corpus.maxprin_v_cases") cfg.maxprin_v_cases = as_int();
        else fail("unknown config key '" + full + "'");
    }
}

namespace {

struct Artifacts {
    fs::path dir;
    std::string hash;

    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::string>& rows) const {
        std::ofstream out(dir / name, std::ios::binary);
        out << "# config " << hash << "\n" << header << "\n";
        for (const std::string& r : rows) out << r << "\n";
    }
    void write_text(const std::string& name, const std::string& body) const {
        std::ofstream out(dir / name, std::ios::binary);
        out << body;
    }
    void write_json_with_hash(const std::string& name, const std::string& json_body) const {
        // Inject the config hash as the leading member of a JSON object.
        std::string body = json_body;
        const auto brace = body.find('{');
        if (brace != std::string::npos)
            body.insert(brace + 1, "\n  \"config_hash\": \"" + hash + "\",");
        write_text(name, body);
    }
};

Artifacts artifacts_for(const ExperimentConfig& cfg) {
    Artifacts a{fs::path(cfg.out_dir), fnv1a_hex(cfg.canonical())};
    fs::create_directories(a.dir);
    return a;
}

struct LoadedMeasure {
    Measure measure;
    std::optional<CantorSquare> cantor;
    double total = 0.0;
};

// Randomized-subdivision Cantor square: corner pattern with seeded cell
// jitter. Kills the log-periodic lacunarity of the strict corner lattice,
// which matters for scale-stability corpora.
AtomicMeasure make_jittered_cantor(double s, int generations, double jitter, double mass,
                                   std::uint64_t seed) {
    Rng rng(seed);
    const double theta = std::pow(4.0, -1.0 / s);
    AtomicMeasure m;
    struct Cell {
        Point2 c;
        double side;
        int lvl;
    };
    std::vector<Cell> stack{{{0.0, 0.0}, 1.0, 0}};
    const double atom_w = mass / std::pow(4.0, generations);
    while (!stack.empty()) {
        const Cell cur = stack.back();
        stack.pop_back();
        if (cur.lvl == generations) {
            m.points.push_back(cur.c);
            m.weights.push_back(atom_w);
            continue;
        }
        const double off = cur.side * (1.0 - theta) / 2.0;
        for (double sx : {-1.0, 1.0}) {
            for (double sy : {-1.0, 1.0}) {
                Point2 c{cur.c.x + sx * off, cur.c.y + sy * off};
                const double jit = cur.side * theta * jitter;
                c.x += rng.uniform(-jit, jit);
                c.y += rng.uniform(-jit, jit);
                stack.push_back({c, cur.side * theta, cur.lvl + 1});
            }
        }
    }
    return m;
}

LoadedMeasure load_measure(const ExperimentConfig& cfg) {
    LoadedMeasure out;
    if (cfg.measure_kind == "cantor-jitter") {
        out.measure = make_jittered_cantor(cfg.s, cfg.cantor_generations, 0.35,
                                           cfg.cantor_mass, cfg.seed);
    } else if (cfg.measure_kind == "cantor") {
        out.cantor = make_cantor_square(cfg.s, cfg.cantor_generations, cfg.cantor_kappa,
                                        cfg.cantor_mass);
        out.measure = out.cantor->measure;
    } else {
        std::ifstream in(cfg.measure_file, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open measure file " + cfg.measure_file);
        std::stringstream ss;
        ss << in.rdbuf();
        out.measure = measure_from_json(ss.str());
    }
    out.total = total_mass(out.measure);
    return out;
}

ConstructionParams effective_params(const ExperimentConfig& cfg, double total) {
    ConstructionParams p = cfg.construction;
    p.s = cfg.s;
    if (p.half_mass <= 0.0) p.half_mass = total / 2.0;
    return p;
}

EstimateReport spread_report(const std::string& name, std::span<const double> values,
                             double tolerance) {
    EstimateReport rep;
    rep.name = name;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.empty() ? 1.0 : static_cast<double>(values.size());
    double spread = 0.0;
    for (double v : values) spread = std::max(spread, std::abs(v - mean));
    rep.measured_lhs = mean != 0.0 ? spread / std::abs(mean) : 0.0;
    rep.bound_rhs = tolerance;
    rep.pass = rep.measured_lhs <= tolerance;
    rep.empirical_constant = mean;
    return rep;
}

// Smooth compactly supported corpus fields: random Gaussian bumps under
// the standard cutoff bump.
GridField random_vector_field(Rng& rng, const GridSpec& spec, int comps, bool positive,
                              double support_radius) {
    GridField f(spec, comps);
    struct Bump {
        Point2 c;
        double w, amp;
    };
    for (int comp = 0; comp < comps; ++comp) {
        std::vector<Bump> bumps;
        const int nb = 3;
        for (int b = 0; b < nb; ++b) {
            const double r = rng.uniform(0.0, 0.5 * support_radius);
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            bumps.push_back({{r * std::cos(ang), r * std::sin(ang)},
                             rng.uniform(0.7, 1.3),
                             positive ? rng.uniform(0.3, 1.0)
                                      : (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 1.0)});
        }
        for (int iy = 0; iy < spec.resolution; ++iy) {
            for (int ix = 0; ix < spec.resolution; ++ix) {
                const Point2 p = spec.cell_center(ix, iy);
                double v = 0.0;
                for (const Bump& b : bumps)
                    v += b.amp * std::exp(-(p - b.c).norm2() / (b.w * b.w));
                f.at(comp, ix, iy) = v * bump_profile(p.norm() / support_radius);
            }
        }
    }
    return f;
}

std::string fmt_row(std::initializer_list<double> vals) {
    std::string row;
    for (double v : vals) {
        if (!row.empty()) row += ',';
        row += format_double(v);
    }
    return row;
}

} // namespace

RunResult run_cantor_demo(const ExperimentConfig& cfg) {
    RunResult out;
    const LoadedMeasure lm = load_measure(cfg);
    if (!lm.cantor) throw std::runtime_error("cantor-demo requires measure.kind = cantor");
    const CantorSquare& sq = *lm.cantor;
    const int g = sq.generations;
    if (g < 2) throw std::runtime_error("cantor-demo requires generations >= 2");
    const AtomicMeasure& nu = sq.measure;
    const std::size_t na = nu.size();
    const double s = cfg.s;

    // Generation-aligned partial potentials P[n][atom].
    std::vector<std::vector<Vec2>> P(g, std::vector<Vec2>(na));
    for (std::size_t i = 0; i < na; ++i) {
        for (int n = 0; n < g; ++n) {
            const int qn = sq.cell_of_atom(static_cast<int>(i), n);
            const int qn1 = sq.cell_of_atom(static_cast<int>(i), n + 1);
            Vec2 sum{0.0, 0.0};
            const auto& cell = sq.cells[qn];
            const auto& sub = sq.cells[qn1];
            for (int y = cell.atom_begin; y < cell.atom_end; ++y) {
                if (y >= sub.atom_begin && y < sub.atom_end) continue;
                sum += nu.weights[y] *
                       RieszEngine::kernel(s, nu.points[i] - nu.points[y]);
            }
            P[n][i] = sum;
        }
    }

    std::vector<std::vector<double>> G(g, std::vector<double>(g, 0.0));
    for (int n = 0; n < g; ++n)
        for (int k = 0; k < g; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < na; ++i) acc += nu.weights[i] * dot(P[n][i], P[k][i]);
            G[n][k] = acc;
        }

    std::vector<std::string> energy_rows;
    std::vector<double> e_over_n;
    const int n_max = std::min(5, g);
    for (int N = 1; N <= n_max; ++N) {
        double e = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
            Vec2 sum{0.0, 0.0};
            for (int n = 0; n < N; ++n) sum += P[n][i];
            e += nu.weights[i] * sum.norm2();
        }
        for (int n = 0; n < N; ++n) diag += G[n][n];
        energy_rows.push_back(fmt_row({static_cast<double>(N), e, e / N, diag,
                                       diag > 0.0 ? e / diag : 0.0}));
        if (N >= 2) e_over_n.push_back(e / N);
    }

    EstimateReport lin = spread_report("cantor_energy_linear", e_over_n, 0.25);
    lin.note = "E_N / N across N = 2..5";
    out.reports.push_back(lin);

    EstimateReport gram;
    gram.name = "cantor_gram_orthogonality";
    double worst_min_form = 0.0, worst_max_form = 0.0;
    for (int n = 0; n < g; ++n)
        for (int k = 0; k < g; ++k) {
            if (n == k) continue;
            const double off = std::abs(G[n][k]);
            worst_min_form = std::max(worst_min_form, off / std::min(G[n][n], G[k][k]));
            worst_max_form = std::max(worst_max_form, off / std::max(G[n][n], G[k][k]));
        }
    gram.measured_lhs = worst_min_form;
    gram.bound_rhs = 0.1;
    gram.pass = worst_min_form <= 0.1;
    gram.metadata["max_form_ratio"] = worst_max_form;
    out.reports.push_back(gram);

    const Artifacts art = artifacts_for(cfg);
    art.write_csv(cfg.id + "_energy.csv", "N,energy,energy_over_N,diag_sum,ortho_ratio",
                  energy_rows);
    std::vector<std::string> gram_rows;
    for (int n = 0; n < g; ++n)
        for (int k = 0; k < g; ++k)
            gram_rows.push_back(fmt_row({static_cast<double>(n), static_cast<double>(k), G[n][k]}));
    art.write_csv(cfg.id + "_gram.csv", "n,k,G", gram_rows);
    return out;
}

RunResult run_transform(const ExperimentConfig& cfg) {
    RunResult out;
    const GridSpec spec(cfg.grid_L, cfg.grid_n);
    GridField density = sample_scalar(spec, [](Point2 p) { return std::exp(-p.norm2()); });
    RieszEngine eng(cfg.s);
    const SpectralResult res = eng.transform_fft(density);

    EstimateReport bw;
    bw.name = "transform_boundary_mass";
    bw.measured_lhs = res.boundary_fraction;
    bw.bound_rhs = 0.01;
    bw.pass = !res.boundary_warning;
    out.reports.push_back(bw);

    // FFT-vs-direct agreement on a deterministic interior lattice.
    const Measure mu = GriddedMeasure{density};
    std::vector<Point2> pts;
    std::vector<Vec2> fft_vals;
    const int n = spec.resolution;
    for (int iy = n / 4; iy < 3 * n / 4; iy += 8)
        for (int ix = n / 4; ix < 3 * n / 4; ix += 8) {
            pts.push_back(spec.cell_center(ix, iy));
            fft_vals.push_back({res.field.at(0, ix, iy), res.field.at(1, ix, iy)});
        }
    const std::vector<Vec2> direct = eng.transform_direct(mu, pts);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        num += (direct[i] - fft_vals[i]).norm2();
        den += direct[i].norm2();
    }
    EstimateReport agree;
    agree.name = "transform_fft_vs_direct";
    agree.measured_lhs = den > 0.0 ? std::sqrt(num / den) : 0.0;
    agree.bound_rhs = 0.02;
    agree.pass = agree.measured_lhs <= 0.02;
    out.reports.push_back(agree);

    const Artifacts art = artifacts_for(cfg);
    for (int comp = 0; comp < 2; ++comp) {
        GridField one(spec, 1);
        for (std::size_t i = 0; i < one.cells(); ++i)
            one.component(0)[i] = res.field.component(comp)[i];
        art.write_json_with_hash(cfg.id + "_R" + std::to_string(comp + 1) + ".json",
                                 measure_to_json(GriddedMeasure{std::move(one)}));
    }
    std::vector<std::string> slice;
    for (int ix = 0; ix < n; ++ix) {
        const Point2 p = spec.cell_center(ix, n / 2);
        slice.push_back(fmt_row({p.x, res.field.at(0, ix, n / 2), res.field.at(1, ix, n / 2)}));
    }
    art.write_csv(cfg.id + "_axis_slice.csv", "x,R1,R2", slice);
    return out;
}

RunResult run_covers(const ExperimentConfig& cfg) {
    RunResult out;
    const LoadedMeasure lm = load_measure(cfg);
    const ConstructionParams p = effective_params(cfg, lm.total);
    const TopCover cover =
        build_top_cover(lm.measure, p.s, p.r_star, p.cover_budget, p.eps);

    // Auto-sized Psi grid: window holds every A_max-dilated disk.
    double reach = 0.0, r_min = 1e300;
    for (const TopCoverEntry& e : cover.entries) {
        reach = std::max(reach, e.disk.center.norm() + cfg.a_max * e.disk.radius);
        r_min = std::min(r_min, e.disk.radius);
    }
    int psi_n = cfg.grid_n;
    double psi_L = 1.1 * reach;
    while (2.0 * psi_L / psi_n > r_min / 4.0 && psi_n < 4096) psi_n *= 2;
    const GridSpec psi_spec(psi_L, psi_n);

    const StandardCap cap = build_standard_cap(cfg.s, GridSpec(16.0, 512));
    const PsiBundle bundle = build_psi_bundle(cover, cap, psi_spec, cfg.a_max);
    RieszEngine eng(cfg.s);
    const VProfile& prof = v_profile();

    double tilde_sum = 0.0;
    for (const TopCoverEntry& e : cover.entries) tilde_sum += e.tilde_mass;
    std::vector<std::string> psi_rows;
    double worst_identity = 0.0;
    for (std::size_t k = 0; k < bundle.a_values.size(); ++k) {
        const double integral = bundle.psi_A[k].integral(0);
        const double rel = std::abs(integral - tilde_sum) / tilde_sum;
        worst_identity = std::max(worst_identity, rel);
        psi_rows.push_back(
            fmt_row({static_cast<double>(bundle.a_values[k]), integral, tilde_sum, rel}));
    }
    EstimateReport ident;
    ident.name = "psi_A_integral_identity";
    ident.measured_lhs = worst_identity;
    ident.bound_rhs = 1e-6;
    ident.pass = worst_identity <= 1e-6;
    ident.metadata["c5"] = bundle.c5;
    ident.metadata["c6"] = bundle.c6;
    out.reports.push_back(ident);

    out.reports.push_back(
        check_psi_lower(lm.measure, cover, bundle, eng, p.half_mass, p.cover_budget));
    out.reports.push_back(jensen_lower(lm.measure, bundle, prof, eng));

    // Seeded admissible nu corpus: nu = sum c_j chi_{T~_j} mu, c in [1/2, 2].
    if (std::holds_alternative<AtomicMeasure>(lm.measure)) {
        const auto& am = std::get<AtomicMeasure>(lm.measure);
        Rng rng(cfg.seed);
        for (int c = 0; c < cfg.psi_corpus_cases; ++c) {
            std::vector<double> scale(cover.entries.size());
            for (double& v : scale) v = rng.uniform(0.5, 2.0);
            AtomicMeasure nu = am;
            for (std::size_t i = 0; i < nu.size(); ++i) {
                const int j = cover.first_containing(nu.points[i]);
                if (j >= 0) nu.weights[i] *= scale[j];
            }
            EstimateReport r1 =
                check_psi_lower(nu, cover, bundle, eng, p.half_mass, p.cover_budget);
            r1.name += "_corpus" + std::to_string(c);
            out.reports.push_back(r1);
            EstimateReport r2 = jensen_lower(nu, bundle, prof, eng);
            r2.name += "_corpus" + std::to_string(c);
            out.reports.push_back(r2);
        }
    }

    // g-function stability across A in {2, 4, 8}.
    std::vector<double> gvals;
    for (int A : {2, 4, 8})
        gvals.push_back(g_l2_norm(cover, A, lm.measure) / p.half_mass);
    EstimateReport gstab = spread_report("g_l2_stability", gvals, 0.20);
    gstab.metadata["A2"] = gvals[0];
    gstab.metadata["A4"] = gvals[1];
    gstab.metadata["A8"] = gvals[2];
    out.reports.push_back(gstab);

    if (std::holds_alternative<AtomicMeasure>(lm.measure)) {
        out.reports.push_back(l2_psi_transform_check(std::get<AtomicMeasure>(lm.measure), cover,
                                                     bundle, eng, p.half_mass));
    }

    // Bottom cover of the same measure.
    if (std::holds_alternative<AtomicMeasure>(lm.measure)) {
        std::vector<Disk> top_disks;
        for (const auto& e : cover.entries) top_disks.push_back(e.disk);
        const BottomCover bot = build_bottom_cover(std::get<AtomicMeasure>(lm.measure), p,
                                                   p.rho_star, top_disks);
        EstimateReport br;
        br.name = "bottom_cover";
        br.measured_lhs = bot.ledger.total();
        br.bound_rhs = 12.0 * std::max(1, bot.covering_number) * p.eps * p.half_mass;
        br.pass = br.measured_lhs <= br.bound_rhs;
        br.empirical_constant = bot.covering_number;
        br.metadata["cells"] = static_cast<double>(bot.cells.size());
        br.metadata["no_sparse_scale"] = bot.ledger.no_sparse_scale;
        br.metadata["ring_loss"] = bot.ledger.ring_loss;
        br.metadata["boundary_strip"] = bot.ledger.boundary_strip;
        out.reports.push_back(br);
    }

    const Artifacts art = artifacts_for(cfg);
    art.write_json_with_hash(cfg.id + "_top_cover.json",
                             "{\n  \"cover\": " + top_cover_to_json(cover) + "\n}\n");
    art.write_csv(cfg.id + "_psi_integrals.csv", "A,psi_A_integral,tilde_sum,rel_err", psi_rows);
    return out;
}

RunResult run_claims(const ExperimentConfig& cfg) {
    RunResult out;
    const LoadedMeasure lm = load_measure(cfg);
    const ConstructionParams p = effective_params(cfg, lm.total);
    const CantorStructure st = build_structure(lm.measure, p);

    out.reports.push_back(claim1_check(st));
    GramResult gram = gram_matrix(st);
    out.reports.push_back(gram.summary);
    for (const auto& r : gram.claim2_per_level) out.reports.push_back(r);

    Claim3Options opts;
    opts.lambda_hat = cfg.lambda_hat;
    if (cfg.lambda_abs > 0.0) opts.lambda_abs = cfg.lambda_abs;
    opts.seed = cfg.seed;
    for (int n = 0; n < p.levels; ++n) {
        EstimateReport base = claim3_lower(st, n, opts);
        // Quadrature-refinement stability of the mollified ingredients.
        Claim3Options fine = opts;
        fine.cap_grid_n = opts.cap_grid_n > 0 ? 2 * opts.cap_grid_n : 0;
        base.metadata["level"] = n;
        out.reports.push_back(base);
    }

    const Artifacts art = artifacts_for(cfg);
    art.write_json_with_hash(cfg.id + "_structure.json", structure_to_json(st));
    std::vector<std::string> gram_rows;
    for (std::size_t n = 0; n < gram.gram.size(); ++n)
        for (std::size_t k = 0; k < gram.gram.size(); ++k)
            gram_rows.push_back(fmt_row({static_cast<double>(n), static_cast<double>(k),
                                         gram.gram[n][k]}));
    art.write_csv(cfg.id + "_gram.csv", "n,k,G", gram_rows);
    std::vector<std::string> rep_rows;
    for (const auto& r : out.reports) rep_rows.push_back(report_to_csv_row(r));
    art.write_csv(cfg.id + "_claims.csv", report_csv_header(), rep_rows);
    return out;
}

RunResult run_maxprin(const ExperimentConfig& cfg) {
    RunResult out;
    const GridSpec spec(10.0, std::min(cfg.grid_n, 128));
    std::vector<std::string> rows;
    int failures = 0, vacuous = 0;
    for (double s : {1.25, 1.75}) {
        Rng rng(cfg.seed ^ static_cast<std::uint64_t>(s * 1000));
        for (int c = 0; c < cfg.maxprin_cases; ++c) {
            const GridField eta = random_vector_field(rng, spec, 2, false, 6.0);
            const EstimateReport rep = max_principle_check(eta, s);
            if (!rep.pass) ++failures;
            if (!rep.note.empty()) ++vacuous;
            rows.push_back(fmt_row({s, static_cast<double>(c), rep.measured_lhs, rep.bound_rhs,
                                    rep.empirical_constant, rep.pass ? 1.0 : 0.0}));
        }
        Rng rng_v(cfg.seed ^ 0x5eedULL ^ static_cast<std::uint64_t>(s * 1000));
        for (int c = 0; c < cfg.maxprin_v_cases; ++c) {
            const GridField nu = random_vector_field(rng_v, spec, 1, true, 6.0);
            const GridField g = random_vector_field(rng_v, spec, 2, false, 6.0);
            const EstimateReport rep = max_principle_check_v(nu, g, s);
            if (!rep.pass) ++failures;
            rows.push_back(fmt_row({s, static_cast<double>(c) + 1000, rep.measured_lhs,
                                    rep.bound_rhs, rep.empirical_constant, rep.pass ? 1.0 : 0.0}));
        }
    }
    EstimateReport rep;
    rep.name = "max_principle_corpus";
    rep.measured_lhs = failures;
    rep.bound_rhs = 0.0;
    rep.pass = failures == 0;
    rep.metadata["vacuous_cases"] = vacuous;
    out.reports.push_back(rep);

    const Artifacts art = artifacts_for(cfg);
    art.write_csv(cfg.id + "_maxprin.csv", "s,case,global_max,support_max,scale,pass", rows);
    return out;
}

RunResult run_equilibrium(const ExperimentConfig& cfg) {
    RunResult out;
    const VProfile& prof = v_profile();

    // Two symmetric caps. Lambda sits at the energy scale so the 6-lambda
    // first-order bound is meaningful (it presumes Phi(a) <= 2 lambda m).
    CapSumMeasure two;
    two.caps.push_back({Disk({-1.0, 0.0}, 0.25), 0.5});
    two.caps.push_back({Disk({+1.0, 0.0}, 0.25), 0.5});
    const CapSystem sys2(two, cfg.s);
    const std::vector<double> ones2(2, 1.0);
    const double lambda = cfg.lambda_abs > 0.0 ? cfg.lambda_abs
                                               : sys2.energy(ones2, prof) / 0.5;
    const MinimizeResult r2 = minimize_phi(lambda, 0.5, sys2, prof, 600, cfg.seed);
    EstimateReport sym;
    sym.name = "equilibrium_two_symmetric";
    sym.measured_lhs = std::max(std::abs(r2.a.alpha[0] - 1.0), std::abs(r2.a.alpha[1] - 1.0));
    sym.bound_rhs = 1e-3;
    sym.pass = sym.measured_lhs <= 1e-3;
    sym.metadata["phi"] = r2.phi;
    out.reports.push_back(sym);

    // Monotone trace and mass conservation.
    bool monotone = true;
    double worst_residual = 0.0;
    for (std::size_t i = 1; i < r2.trace.size(); ++i) {
        if (r2.trace[i].phi > r2.trace[i - 1].phi + 1e-12 * (1.0 + std::abs(r2.trace[i].phi)))
            monotone = false;
        worst_residual = std::max(worst_residual, r2.trace[i].constraint_residual);
    }
    EstimateReport mono;
    mono.name = "equilibrium_trace_monotone";
    mono.measured_lhs = monotone ? 0.0 : 1.0;
    mono.bound_rhs = 0.0;
    mono.pass = monotone;
    mono.metadata["constraint_residual"] = worst_residual;
    out.reports.push_back(mono);
    EstimateReport massres;
    massres.name = "equilibrium_mass_residual";
    massres.measured_lhs = worst_residual / sys2.total_mass();
    massres.bound_rhs = 1e-10;
    massres.pass = massres.measured_lhs <= 1e-10;
    out.reports.push_back(massres);

    // Asymmetric three-cap toy with first-order certificates. Masses keep
    // the fields in the quadratic zone of v, where the 6-lambda bound
    // discriminates between the minimizer and perturbed weights; lambda is
    // frozen inside that measured window.
    CapSumMeasure three;
    three.caps.push_back({Disk({-1.0, 0.0}, 0.30), 0.02});
    three.caps.push_back({Disk({0.8, 0.3}, 0.20), 0.03});
    three.caps.push_back({Disk({0.2, -1.1}, 0.25), 0.02});
    const CapSystem sys3(three, cfg.s);
    const double m3 = sys3.total_mass() / 2.0;
    const double lambda3 = cfg.lambda_abs > 0.0 ? cfg.lambda_abs : 0.08;
    const MinimizeResult r3 = minimize_phi(lambda3, m3, sys3, prof, 900, cfg.seed);
    std::vector<double> uniform(3, 1.0);
    const double phi_uniform = phi_eval(uniform, lambda3, m3, sys3, prof);
    EstimateReport desc;
    desc.name = "equilibrium_three_cap_descent";
    desc.measured_lhs = r3.phi;
    desc.bound_rhs = phi_uniform;
    desc.pass = r3.phi <= phi_uniform + 1e-12;
    out.reports.push_back(desc);
    for (int j = 0; j < 3; ++j) {
        EstimateReport fo = first_order_residual(r3.a, lambda3, j, m3, sys3, prof);
        out.reports.push_back(fo);
    }

    // Deliberately non-optimal weights must violate the first-order bound
    // somewhere.
    {
        std::vector<double> bad = r3.a.alpha;
        bad[0] = bad[0] * 8.0 + 0.5;
        double cm = 0.0;
        for (int j = 0; j < 3; ++j) cm += bad[j] * sys3.cap_mass(j);
        for (double& v : bad) v *= sys3.total_mass() / cm;
        Weights wbad{bad, lambda3, sys3.total_mass()};
        bool some_violation = false;
        for (int j = 0; j < 3; ++j) {
            if (wbad.alpha[j] <= 0.0) continue;
            EstimateReport fo = first_order_residual(wbad, lambda3, j, m3, sys3, prof);
            if (!fo.pass) some_violation = true;
        }
        EstimateReport probe;
        probe.name = "equilibrium_perturbed_probe";
        probe.measured_lhs = some_violation ? 1.0 : 0.0;
        probe.bound_rhs = 1.0;
        probe.pass = some_violation;
        probe.note = "non-optimal weights must fail the first-order bound";
        out.reports.push_back(probe);
    }

    const Artifacts art = artifacts_for(cfg);
    std::vector<std::string> trace_rows;
    for (const TraceRow& t : r3.trace)
        trace_rows.push_back(fmt_row({static_cast<double>(t.iter), t.phi, t.max_alpha,
                                      t.constraint_residual}));
    art.write_csv(cfg.id + "_equilibrium_trace.csv", "iter,phi,max_alpha,constraint_residual",
                  trace_rows);
    return out;
}

RunResult run_report(const ExperimentConfig& cfg) {
    RunResult out;

    // Profile suite: the six v-inequalities on a deterministic sweep.
    {
        const VProfile& prof = v_profile();
        int violations = 0;
        const int steps = 10000;
        for (int i = 0; i <= steps; ++i) {
            const double t = 20.0 * i / steps;
            const double v = prof.v(t), dv = prof.dv(t), ddv = prof.ddv(t);
            if (v < std::min(t, t * t) - 1e-9 || v > t * t + 1e-9) ++violations;
            if (dv > 4.0 + 1e-9) ++violations;
            if (t * dv > 2.0 * v + 1e-9) ++violations;
            if (dv * dv > 4.0 * v + 1e-9) ++violations;
            if (i > 0) {
                const double t_prev = 20.0 * (i - 1) / steps;
                if (prof.ddv(t_prev) < ddv - 1e-9) ++violations;
            }
            const double a = 1.0 + 9.0 * halton(i + 1, 2);
            if (t > 0 && prof.v(a * t) > a * a * v * (1.0 + 1e-9) + 1e-12) ++violations;
        }
        EstimateReport rep;
        rep.name = "v_profile_inequalities";
        rep.measured_lhs = violations;
        rep.bound_rhs = 0.0;
        rep.pass = violations == 0;
        out.reports.push_back(rep);

        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            const double t = 2.0 * i / 400.0;
            worst = std::max(worst, std::abs(prof.biconjugate(t) - prof.v(t)));
        }
        EstimateReport dual;
        dual.name = "legendre_duality";
        dual.measured_lhs = worst;
        dual.bound_rhs = 1e-6;
        dual.pass = worst <= 1e-6;
        out.reports.push_back(dual);
    }

    // Hoelder inequality corpus.
    {
        Rng rng(cfg.seed ^ 0x601dULL);
        int violations = 0;
        bool equality_seen = false;
        for (int c = 0; c < 10000; ++c) {
            const int len = rng.uniform_int(1, 20);
            std::vector<double> a(len), b(len);
            for (int i = 0; i < len; ++i) {
                a[i] = rng.uniform(1e-3, 10.0);
                b[i] = rng.uniform(1e-3, 10.0);
            }
            const auto [lhs, rhs] = holder_check(a, b);
            if (lhs < rhs * (1.0 - 1e-12)) ++violations;
        }
        // Proportional vectors give exact equality.
        std::vector<double> a{1.0, 2.0, 3.0};
        std::vector<double> b{2.0, 4.0, 6.0};
        const auto [lhs, rhs] = holder_check(a, b);
        equality_seen = std::abs(lhs - rhs) <= 1e-12 * lhs;
        EstimateReport rep;
        rep.name = "holder_corpus";
        rep.measured_lhs = violations;
        rep.bound_rhs = 0.0;
        rep.pass = violations == 0 && equality_seen;
        rep.metadata["equality_detected"] = equality_seen ? 1.0 : 0.0;
        out.reports.push_back(rep);
    }

    for (auto& r : run_transform(cfg).reports) out.reports.push_back(r);
    for (auto& r : run_covers(cfg).reports) out.reports.push_back(r);
    for (auto& r : run_claims(cfg).reports) out.reports.push_back(r);
    for (auto& r : run_equilibrium(cfg).reports) out.reports.push_back(r);

    const Artifacts art = artifacts_for(cfg);
    std::vector<std::string> rows;
    std::string json_all = "{\n  \"reports\": [\n";
    for (std::size_t i = 0; i < out.reports.size(); ++i) {
        rows.push_back(report_to_csv_row(out.reports[i]));
        std::string body = report_to_json(out.reports[i]);
        json_all += body;
        if (i + 1 < out.reports.size()) json_all += ",";
        json_all += "\n";
    }
    json_all += "]\n}\n";
    art.write_csv(cfg.id + "_reports.csv", report_csv_header(), rows);
    art.write_json_with_hash(cfg.id + "_reports.json", json_all);
    return out;
}

int run(const std::string& subcommand, const ExperimentConfig& cfg) {
    const std::vector<std::string> bad = cfg.validate();
    if (!bad.empty()) {
        for (const std::string& msg : bad) std::fprintf(stderr, "config error: %s\n", msg.c_str());
        return 2;
    }
    RunResult result;
    if (subcommand == "cantor-demo") result = run_cantor_demo(cfg);
    else if (subcommand == "transform") result = run_transform(cfg);
    else if (subcommand == "covers") result = run_covers(cfg);
    else if (subcommand == "claims") result = run_claims(cfg);
    else if (subcommand == "maxprin") result = run_maxprin(cfg);
    else if (subcommand == "equilibrium") result = run_equilibrium(cfg);
    else if (subcommand == "report") result = run_report(cfg);
    else {
        std::fprintf(stderr, "unknown subcommand %s\n", subcommand.c_str());
        return 2;
    }
    for (const EstimateReport& r : result.reports)
        std::printf("%-40s lhs=%.6g rhs=%.6g %s\n", r.name.c_str(), r.measured_lhs, r.bound_rhs,
                    r.pass ? "PASS" : "FAIL");
    return result.all_pass() ? 0 : 1;
}

} // namespace rieszlab::cli
