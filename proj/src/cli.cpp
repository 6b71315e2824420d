#include "multiacc/cli.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "multiacc/accuracy.hpp"
#include "multiacc/adaptive_merge.hpp"
#include "multiacc/bigcount.hpp"
#include "multiacc/demo_digits.hpp"
#include "multiacc/errors.hpp"
#include "multiacc/gaussian_moments.hpp"
#include "multiacc/json_out.hpp"
#include "multiacc/matrix_io.hpp"
#include "multiacc/pairing.hpp"
#include "multiacc/permanent.hpp"
#include "multiacc/sat_reduction.hpp"

namespace multiacc::cli {

namespace {

using nlohmann::json;
using Sample = Eigen::MatrixXd;

struct GlobalOptions {
    std::uint64_t seed = 1;
    std::uint64_t samples = 100'000;
    double eps = 0.1;
    double delta = 0.1;
    std::string output = "json";
    std::uint64_t cap = 4096;
    int threads = 1;
    bool assert_mode = false;
};

void emit(const json& report, const GlobalOptions& opt, std::ostream& out) {
    if (opt.output == "csv") {
        out << json_to_csv(report);
    } else {
        out << report.dump(2) << "\n";
    }
}

int verdict_exit(const std::vector<AccuracyReport>& reports, const GlobalOptions& opt) {
    if (!opt.assert_mode) return 0;
    for (const auto& r : reports)
        if (r.verdict == Verdict::violated) return 3;
    return 0;
}

// Estimators from the permanent family expressed as linear combinations of
// the closed-form moment basis {1, E_row, E_col, E_ms}, so that exact-mode
// accuracy checks work for all of them.
LinearEstimator<Sample> permanent_linear_estimator(const std::string& name, int n) {
    auto base = [&](const std::string& b) { return permanent_predictor(b); };
    LinearEstimator<Sample> f;
    f.name = name;
    const BigCount fact = factorial(static_cast<unsigned>(n));
    const BigCount nn = big_pow(static_cast<std::uint64_t>(n), static_cast<unsigned>(n));
    if (name == "E_row" || name == "E_col" || name == "E_ms" || name == "1") {
        f.terms.emplace_back(base(name), 1.0);
        return f;
    }
    if (name == "E_ms_prime") {
        BigCount den = double_factorial(2 * n - 1);
        if (n % 2 == 0) den -= double_factorial(n - 1) * double_factorial(n - 1);
        mpq_class b(fact, den);
        b.canonicalize();
        mpq_class offset = 0;
        if (n % 2 == 0) {
            offset = mpq_class(fact * double_factorial(n - 1), nn);
            offset.canonicalize();
        }
        f.terms.emplace_back(base("E_ms"), b.get_d());
        if (offset != 0) f.terms.emplace_back(base("1"), -mpq_class(b * offset).get_d());
        return f;
    }
    if (name == "E_row_col") {
        mpq_class c(nn, nn + fact);
        c.canonicalize();
        f.terms.emplace_back(base("E_row"), c.get_d());
        f.terms.emplace_back(base("E_col"), c.get_d());
        return f;
    }
    if (name == "E_row_col_ms") {
        // Expand via E_ms_prime's own expansion.
        LinearEstimator<Sample> msp = permanent_linear_estimator("E_ms_prime", n);
        BigCount den = double_factorial(2 * n - 1);
        if (n % 2 == 0) den -= double_factorial(n - 1) * double_factorial(n - 1);
        mpq_class b(fact, den);
        b.canonicalize();
        mpq_class q(fact, nn);
        q.canonicalize();
        const mpq_class one_minus_qb = 1 - q * b;
        const mpq_class one_minus_q = 1 - q;
        const mpq_class denom = 2 * one_minus_qb - one_minus_q;
        const double c_rc = mpq_class(one_minus_qb / denom).get_d();
        const double c_msp = mpq_class(one_minus_q / denom).get_d();
        f.terms.emplace_back(base("E_row"), c_rc);
        f.terms.emplace_back(base("E_col"), c_rc);
        for (const auto& [p, c] : msp.terms) f.terms.emplace_back(p, -c_msp * c);
        return f;
    }
    throw InvariantError("estimator '" + name + "' is not linear over the closed-form moment basis; use --mode mc");
}

// ---------------------------------------------------------------------------

int cmd_haf_merge(const std::vector<std::string>& files, const GlobalOptions& opt,
                  std::uint64_t max_samples, std::ostream& out, std::ostream& err) {
    std::vector<PairingStructure> structures;
    structures.reserve(files.size());
    for (const auto& f : files) structures.push_back(parse_structure(read_file(f)));

    MergeConfig config;
    config.eps = opt.eps;
    config.delta = opt.delta;
    config.max_samples = max_samples;

    json report;
    MergeResult result = [&] {
        try {
            return merge_estimator(structures, config, opt.seed);
        } catch (const BudgetExceededError& e) {
            report["merge"] = merge_result_json(e.partial);
            report["error"] = e.what();
            emit(report, opt, out);
            err << e.what() << "\n";
            throw;
        }
    }();
    report["merge"] = merge_result_json(result);

    const BigCount cap(static_cast<unsigned long>(opt.cap));
    bool enumerable = true;
    for (const auto& t : structures)
        if (t.num_pairings() > cap) enumerable = false;
    std::vector<AccuracyReport> verify;
    if (enumerable) {
        verify = verify_merge_exact(result, structures, cap);
        report["verify"] = reports_json(verify);
    }
    emit(report, opt, out);
    return verdict_exit(verify, opt);
}

int cmd_perm_estimate(const std::string& file, std::vector<std::string> estimators,
                      const std::string& denominator, const GlobalOptions& opt, std::ostream& out) {
    const Eigen::MatrixXd a = load_matrix(file);
    const int n = static_cast<int>(a.rows());
    if (estimators.empty())
        estimators = {"row", "col", "ms", "ms-prime", "row-col", "row-col-ms", "us", "multiplicative"};

    const MultiplicativeDenominator denom =
        denominator == "us" ? MultiplicativeDenominator::us : MultiplicativeDenominator::ms;
    std::map<std::string, std::function<double()>> dispatch = {
        {"row", [&] { return e_row(a); }},
        {"col", [&] { return e_col(a); }},
        {"ms", [&] { return e_ms(a); }},
        {"ms-prime", [&] { return e_ms_prime(a); }},
        {"row-col", [&] { return e_row_col(a); }},
        {"row-col-ms", [&] { return e_row_col_ms(a); }},
        {"us", [&] { return e_us(a); }},
        {"multiplicative", [&] { return multiplicative(a, denom); }},
    };

    json report;
    report["n"] = n;
    if (n <= 20) report["perm"] = perm_bruteforce(a);
    json estimates = json::object();
    for (const auto& name : estimators) {
        auto it = dispatch.find(name);
        if (it == dispatch.end()) throw InvariantError("unknown estimator '" + name + "'");
        json entry;
        try {
            const double v = it->second();
            entry["value"] = v;
            if (v < 0.0) entry["negative_estimate"] = true;
        } catch (const std::exception& e) {
            // A zero denominator (or capacity limit) is a per-estimator
            // condition, not a process failure.
            entry["error"] = e.what();
        }
        estimates[name] = entry;
    }
    report["estimates"] = estimates;
    emit(report, opt, out);
    return 0;
}

int cmd_accuracy_check(const std::string& target, const std::string& estimator_spec,
                       const std::vector<std::string>& predictor_specs, int n, const std::string& mode,
                       bool approx, const GlobalOptions& opt, std::ostream& out) {
    std::vector<AccuracyReport> reports;

    if (target == "permanent") {
        Predictor<Sample> y = permanent_predictor("perm");
        y.name = "perm";
        std::vector<Predictor<Sample>> predictors;
        for (const auto& s : predictor_specs) predictors.push_back(permanent_predictor(s));
        if (mode == "exact") {
            const ExactMoments moments = perm_exact_moments(n);
            LinearEstimator<Sample> f = permanent_linear_estimator(estimator_spec, n);
            for (const auto& x : predictors)
                reports.push_back(approx ? check_approx_accuracy(f, x, y, moments, opt.eps)
                                         : check_accuracy(f, x, y, moments));
        } else {
            McMoments<Sample> moments([n](Rng& rng) { return sample_matrix(n, rng); }, opt.samples,
                                      opt.seed, opt.threads);
            LinearEstimator<Sample> f;
            f.name = estimator_spec;
            f.terms.emplace_back(permanent_predictor(estimator_spec), 1.0);
            for (const auto& x : predictors)
                reports.push_back(approx ? check_approx_accuracy(f, x, y, moments, opt.eps)
                                         : check_accuracy(f, x, y, moments));
        }
    } else if (target == "hafnian") {
        // Specs are pairing-structure files, or "1" for the constant.
        PairingStructure ft = parse_structure(read_file(estimator_spec));
        const int dim = ft.index_set().back();
        LinearEstimator<Sample> f;
        f.name = "X_f";
        f.terms.emplace_back(Predictor<Sample>{"X_f", [ft](const Sample& s) { return eval_x(ft, s); }}, 1.0);

        std::vector<Predictor<Sample>> predictors;
        std::vector<PairingStructure> structures{ft};
        std::vector<std::string> names{"X_f"};
        int counter = 0;
        for (const auto& s : predictor_specs) {
            if (s == "1") {
                predictors.push_back(constant_one<Sample>());
                continue;
            }
            PairingStructure t = parse_structure(read_file(s));
            if (t.index_set() != ft.index_set())
                throw InvariantError("predictor structure '" + s + "' has a different index set");
            const std::string name = "X_T" + std::to_string(++counter);
            predictors.push_back(Predictor<Sample>{name, [t](const Sample& sg) { return eval_x(t, sg); }});
            structures.push_back(t);
            names.push_back(name);
        }
        Predictor<Sample> y{"Y", [](const Sample& s) { return haf_bruteforce(s); }};

        if (mode == "exact") {
            const BigCount cap(static_cast<unsigned long>(opt.cap));
            ExactMoments moments;
            moments.set("1", "1", 1.0);
            moments.set("Y", "1", 0.0);
            const int idx_n = static_cast<int>(ft.index_set().size());
            moments.set("Y", "Y", to_double(double_factorial(idx_n - 1)));
            for (std::size_t i = 0; i < structures.size(); ++i) {
                moments.set(names[i], "1", 0.0);
                moments.set(names[i], "Y", to_double(structures[i].num_pairings()));
                for (std::size_t j = i; j < structures.size(); ++j)
                    moments.set(names[i], names[j],
                                to_double(intersection_count(structures[i], structures[j], cap)));
            }
            for (const auto& x : predictors)
                reports.push_back(approx ? check_approx_accuracy(f, x, y, moments, opt.eps)
                                         : check_accuracy(f, x, y, moments));
        } else {
            if (dim > 14) throw CapacityError("hafnian MC target needs index set size <= 14");
            McMoments<Sample> moments([dim](Rng& rng) { return sample_sigma(dim, rng); }, opt.samples,
                                      opt.seed, opt.threads);
            for (const auto& x : predictors)
                reports.push_back(approx ? check_approx_accuracy(f, x, y, moments, opt.eps)
                                         : check_accuracy(f, x, y, moments));
        }
    } else {
        throw InvariantError("unknown target '" + target + "' (expected permanent or hafnian)");
    }

    emit(reports_json(reports), opt, out);
    return verdict_exit(reports, opt);
}

int cmd_reduce_cnf(const std::string& file, bool do_verify, const GlobalOptions& opt, std::ostream& out) {
    const CnfFormula phi = parse_dimacs(read_file(file));
    const ReductionOutput red = build_reduction(phi);
    json report = reduction_json(phi, red);
    report["validation_t"] = validation_json(validate(red.t, BigCount(static_cast<unsigned long>(opt.cap))));
    report["validation_u"] = validation_json(validate(red.u, BigCount(static_cast<unsigned long>(opt.cap))));
    if (do_verify) {
        const ReductionVerification v = verify_reduction(phi, BigCount(static_cast<unsigned long>(opt.cap)));
        report["verify"] = {{"intersection", v.intersection.get_str()},
                            {"sat_count_occurring", v.sat_count_occurring},
                            {"match", v.match}};
    }
    emit(report, opt, out);
    return 0;
}

int cmd_demo_digits(const GlobalOptions& opt, std::ostream& out) {
    const DigitDemo demo = demo_digits();
    json rows = json::array();
    for (int k = 0; k <= 20; ++k) {
        json row;
        row["k"] = k;
        if (k == 0) row["digit"] = nullptr;
        else row["digit"] = demo.digits[static_cast<std::size_t>(k - 1)];
        row["estimate"] = demo.estimates[static_cast<std::size_t>(k)];
        rows.push_back(row);
    }
    emit(rows, opt, out);
    return 0;
}

int cmd_enumerate_pairings(const std::string& file, int n, const GlobalOptions& opt, std::ostream& out) {
    std::vector<Pairing> pairings;
    BigCount count;
    if (!file.empty()) {
        const PairingStructure t = parse_structure(read_file(file));
        count = t.num_pairings();
        pairings = enumerate_pairings(t, BigCount(static_cast<unsigned long>(opt.cap)));
    } else {
        pairings = all_pairings(n);
        count = BigCount(static_cast<unsigned long>(pairings.size()));
    }
    json report;
    report["count"] = count.get_str();
    json list = json::array();
    for (const auto& p : pairings) list.push_back(p.to_string());
    report["pairings"] = list;
    emit(report, opt, out);
    return 0;
}

int cmd_validate_structure(const std::string& file, const GlobalOptions& opt, std::ostream& out) {
    const PairingStructure t = parse_structure(read_file(file));
    const ValidationReport v = validate(t, BigCount(static_cast<unsigned long>(opt.cap)));
    json report = validation_json(v);
    report["index_set"] = t.index_set();
    report["num_pairings"] = t.num_pairings().get_str();
    report["rsize"] = t.rsize();
    emit(report, opt, out);
    return (opt.assert_mode && !v.ok) ? 3 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairing-structure estimators, accuracy checks, and merges for hafnians and permanents",
                 "multiacc"};
    app.require_subcommand(1);
    app.fallthrough(true);

    GlobalOptions opt;
    app.add_option("--seed", opt.seed, "RNG seed (default 1)");
    app.add_option("--samples", opt.samples, "Monte-Carlo sample count (default 100000)");
    app.add_option("--eps", opt.eps, "approximate-accuracy tolerance (default 0.1)");
    app.add_option("--delta", opt.delta, "failure probability tolerance (default 0.1)");
    app.add_option("--output", opt.output, "output format: json or csv (default json)")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--cap", opt.cap, "enumeration cap for exact set operations (default 4096)");
    app.add_option("--threads", opt.threads, "worker threads for Monte-Carlo paths (default 1)");
    app.add_flag("--assert", opt.assert_mode, "exit 3 when any verdict is violated");

    // haf-merge
    auto* merge_cmd = app.add_subcommand("haf-merge", "adaptively merge pairing-structure estimators");
    std::vector<std::string> merge_files;
    std::uint64_t max_samples = 100'000'000;
    merge_cmd->add_option("files", merge_files, "pairing structure files")->required()->expected(-1);
    merge_cmd->add_option("--max-samples", max_samples, "probe budget (default 1e8)");

    // perm-estimate
    auto* perm_cmd = app.add_subcommand("perm-estimate", "closed-form permanent estimates");
    std::string matrix_file;
    std::vector<std::string> estimators;
    std::string denominator = "ms";
    perm_cmd->add_option("matrix", matrix_file, "matrix file (JSON or whitespace grid)")->required();
    perm_cmd->add_option("--estimators", estimators, "subset of estimators to run")->delimiter(',');
    perm_cmd->add_option("--denominator", denominator, "multiplicative denominator: ms or us")
        ->check(CLI::IsMember({"ms", "us"}));

    // accuracy-check
    auto* acc_cmd = app.add_subcommand("accuracy-check", "accuracy defects of an estimator");
    std::string target, estimator_spec, mode = "mc";
    std::vector<std::string> predictor_specs;
    int acc_n = 3;
    bool approx = false;
    acc_cmd->add_option("--target", target, "permanent or hafnian")->required();
    acc_cmd->add_option("--estimator", estimator_spec, "estimator name (permanent) or structure file (hafnian)")
        ->required();
    acc_cmd->add_option("--predictors", predictor_specs, "predictor names or structure files")
        ->required()
        ->delimiter(',');
    acc_cmd->add_option("--n", acc_n, "matrix dimension for the permanent target (default 3)");
    acc_cmd->add_option("--mode", mode, "exact or mc (default mc)")->check(CLI::IsMember({"exact", "mc"}));
    acc_cmd->add_flag("--approx", approx, "use the (eps, X)-accuracy bound instead of a plain defect test");

    // reduce-cnf
    auto* cnf_cmd = app.add_subcommand("reduce-cnf", "compile a 3CNF into pairing structures");
    std::string cnf_file;
    bool do_verify = false;
    cnf_cmd->add_option("cnf", cnf_file, "DIMACS CNF file (3 literals per clause)")->required();
    cnf_cmd->add_flag("--verify", do_verify, "check the intersection count against brute-force #SAT");

    // demo-digits
    app.add_subcommand("demo-digits", "running-estimate demo over square-root digits");

    // enumerate-pairings
    auto* enum_cmd = app.add_subcommand("enumerate-pairings", "list the pairings of a structure or of {1..n}");
    std::string enum_file;
    int enum_n = 0;
    enum_cmd->add_option("file", enum_file, "pairing structure file");
    enum_cmd->add_option("--n", enum_n, "enumerate all pairings of {1..n} instead");

    // validate-structure
    auto* val_cmd = app.add_subcommand("validate-structure", "check structure invariants and union disjointness");
    std::string val_file;
    val_cmd->add_option("file", val_file, "pairing structure file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg;
        const int code = app.exit(e, out, msg);
        err << msg.str();
        return code == 0 ? 0 : 1;
    }

    try {
        if (merge_cmd->parsed()) return cmd_haf_merge(merge_files, opt, max_samples, out, err);
        if (perm_cmd->parsed()) return cmd_perm_estimate(matrix_file, estimators, denominator, opt, out);
        if (acc_cmd->parsed())
            return cmd_accuracy_check(target, estimator_spec, predictor_specs, acc_n, mode, approx, opt, out);
        if (cnf_cmd->parsed()) return cmd_reduce_cnf(cnf_file, do_verify, opt, out);
        if (app.get_subcommand("demo-digits")->parsed()) return cmd_demo_digits(opt, out);
        if (enum_cmd->parsed()) {
            if (enum_file.empty() && enum_n == 0)
                throw InvariantError("enumerate-pairings: provide a structure file or --n");
            return cmd_enumerate_pairings(enum_file, enum_n, opt, out);
        }
        if (val_cmd->parsed()) return cmd_validate_structure(val_file, opt, out);
    } catch (const BudgetExceededError&) {
        return 2;
    } catch (const CapacityError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const InvariantError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace multiacc::cli
