#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "boolezeta/experiments.hpp"

namespace boolezeta {

/// Validation or parse failure in a configuration file; `key` names the offending entry.
class config_error : public std::invalid_argument {
public:
    config_error(std::string key, const std::string& msg)
        : std::invalid_argument(key.empty() ? msg : key + ": " + msg), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

template <class T>
std::string join(const std::vector<T>& v, auto&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt(v[i]);
    }
    return out;
}

/// Key-value store that remembers which keys were read.
class KeyValues {
public:
    void set(const std::string& key, const std::string& value, int line) {
        if (map_.count(key)) throw config_error(key, "duplicate key (line " + std::to_string(line) + ")");
        map_[key] = value;
    }
    [[nodiscard]] bool has(const std::string& key) const { return map_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        auto it = map_.find(key);
        return it == map_.end() ? fallback : it->second;
    }
    double real(const std::string& key, double fallback) {
        used_.insert(key);
        return has(key) ? parse_real(key, map_.at(key)) : fallback;
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        used_.insert(key);
        return has(key) ? parse_int(key, map_.at(key)) : fallback;
    }
    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        const auto v = integer(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw config_error(key, "must be nonnegative");
        return static_cast<std::uint64_t>(v);
    }
    bool boolean(const std::string& key, bool fallback) {
        used_.insert(key);
        if (!has(key)) return fallback;
        const auto v = map_.at(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw config_error(key, "expected true or false, got '" + v + "'");
    }
    std::vector<std::int64_t> int_list(const std::string& key) {
        std::vector<std::int64_t> out;
        for (const auto& t : split_list(str(key, ""))) out.push_back(parse_int(key, t));
        return out;
    }
    std::vector<double> real_list(const std::string& key) {
        std::vector<double> out;
        for (const auto& t : split_list(str(key, ""))) out.push_back(parse_real(key, t));
        return out;
    }
    std::vector<std::uint64_t> count_list(const std::string& key) {
        std::vector<std::uint64_t> out;
        for (auto v : int_list(key)) {
            if (v < 0) throw config_error(key, "entries must be nonnegative");
            out.push_back(static_cast<std::uint64_t>(v));
        }
        return out;
    }
    void require_all_used() const {
        for (const auto& [k, v] : map_)
            if (!used_.count(k)) throw config_error(k, "unknown key (or not used by the selected variant)");
    }

    static double parse_real(const std::string& key, const std::string& t) {
        double v = 0.0;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size())
            throw config_error(key, "expected a real number, got '" + t + "'");
        return v;
    }
    static std::int64_t parse_int(const std::string& key, const std::string& t) {
        std::int64_t v = 0;
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc() || r.ptr != t.data() + t.size())
            throw config_error(key, "expected an integer, got '" + t + "'");
        return v;
    }

private:
    std::map<std::string, std::string> map_;
    std::set<std::string> used_;
};

template <class E>
E parse_enum(KeyValues& kv, const std::string& key, const std::vector<std::pair<const char*, E>>& options, E fallback) {
    if (!kv.has(key)) {
        kv.str(key, "");
        return fallback;
    }
    const auto v = kv.str(key, "");
    std::string names;
    for (const auto& [n, e] : options) {
        if (v == n) return e;
        names += names.empty() ? n : std::string(", ") + n;
    }
    throw config_error(key, "unknown value '" + v + "' (expected one of: " + names + ")");
}

inline const std::vector<std::pair<const char*, ExperimentKind>>& kind_names() {
    static const std::vector<std::pair<const char*, ExperimentKind>> v{
        {"ergodic_average", ExperimentKind::ergodic_average}, {"moving_average", ExperimentKind::moving_average},
        {"lindelof_moment", ExperimentKind::lindelof_moment}, {"rh_log_average", ExperimentKind::rh_log_average},
        {"variation_stats", ExperimentKind::variation_stats}, {"frequency_counts", ExperimentKind::frequency_counts}};
    return v;
}
inline const std::vector<std::pair<const char*, Transform>>& transform_names() {
    static const std::vector<std::pair<const char*, Transform>> v{{"identity", Transform::identity},
                                                                  {"abs", Transform::abs},
                                                                  {"abs_power", Transform::abs_power},
                                                                  {"log_abs", Transform::log_abs}};
    return v;
}

// -- family -----------------------------------------------------------------

inline ZetaFamily parse_family(KeyValues& kv) {
    const auto name = kv.str("family.name", "riemann");
    if (name == "riemann") return Riemann{static_cast<int>(kv.integer("family.k", 0))};
    if (name == "hurwitz")
        return Hurwitz{static_cast<int>(kv.integer("family.k", 0)), kv.real("family.a", 0.0)};
    if (name == "dirichlet_l") {
        const int k = static_cast<int>(kv.integer("family.k", 0));
        const auto ch = kv.str("family.character", "kronecker");
        try {
            if (ch == "principal") {
                const auto q = kv.integer("family.modulus", 1);
                if (q < 1) throw config_error("family.modulus", "must be >= 1");
                return DirichletL{k, DirichletCharacter::principal(static_cast<std::uint64_t>(q))};
            }
            if (ch == "kronecker") return DirichletL{k, DirichletCharacter::kronecker(kv.integer("family.discriminant", -4))};
            if (ch == "table") {
                const auto re = kv.real_list("family.values.re");
                auto im = kv.real_list("family.values.im");
                if (im.empty()) im.assign(re.size(), 0.0);
                if (im.size() != re.size())
                    throw config_error("family.values.im", "must have as many entries as family.values.re");
                std::vector<cplx> vals(re.size());
                for (std::size_t i = 0; i < re.size(); ++i) vals[i] = {re[i], im[i]};
                return DirichletL{k, DirichletCharacter::from_table(std::move(vals))};
            }
        } catch (const config_error&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw config_error("family.character", e.what());
        }
        throw config_error("family.character", "unknown value '" + ch + "' (expected principal, kronecker, table)");
    }
    if (name == "dedekind_quadratic") return DedekindQuadratic{kv.integer("family.discriminant", -4)};
    if (name == "constant") return ConstantFn{{kv.real("family.value.re", 1.0), kv.real("family.value.im", 0.0)}};
    throw config_error("family.name", "unknown value '" + name +
                                          "' (expected riemann, hurwitz, dirichlet_l, dedekind_quadratic, constant)");
}

inline void emit_family(std::ostream& os, const ZetaFamily& f) {
    std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Riemann>) {
                os << "family.name = riemann\nfamily.k = " << v.k << "\n";
            } else if constexpr (std::is_same_v<V, Hurwitz>) {
                os << "family.name = hurwitz\nfamily.k = " << v.k << "\nfamily.a = " << format_double(v.a) << "\n";
            } else if constexpr (std::is_same_v<V, DirichletL>) {
                os << "family.name = dirichlet_l\nfamily.k = " << v.k << "\n";
                switch (v.chi.kind()) {
                    case DirichletCharacter::Kind::principal:
                        os << "family.character = principal\nfamily.modulus = " << v.chi.modulus() << "\n";
                        break;
                    case DirichletCharacter::Kind::kronecker:
                        os << "family.character = kronecker\nfamily.discriminant = " << v.chi.discriminant() << "\n";
                        break;
                    default:
                        os << "family.character = table\nfamily.values.re = "
                           << join(v.chi.values(), [](cplx c) { return format_double(c.real()); })
                           << "\nfamily.values.im = "
                           << join(v.chi.values(), [](cplx c) { return format_double(c.imag()); }) << "\n";
                }
            } else if constexpr (std::is_same_v<V, DedekindQuadratic>) {
                os << "family.name = dedekind_quadratic\nfamily.discriminant = " << v.D << "\n";
            } else {
                os << "family.name = constant\nfamily.value.re = " << format_double(v.value.real())
                   << "\nfamily.value.im = " << format_double(v.value.imag()) << "\n";
            }
        },
        f);
}

// -- sequence ---------------------------------------------------------------

inline SequenceSpec parse_sequence(KeyValues& kv, const std::string& prefix) {
    const auto variant = kv.str(prefix + "variant", "natural");
    const auto key = [&](const char* k) { return prefix + k; };
    if (variant == "natural") return Natural{};
    if (variant == "poly_floor") return PolyFloor{kv.real(key("gamma"), 1.5)};
    if (variant == "log_exp_floor") return LogExpFloor{kv.real(key("gamma"), 1.25)};
    if (variant == "integer_polynomial") return IntegerPolynomial{kv.int_list(key("coeffs"))};
    if (variant == "polynomial_of_primes") return PolynomialOfPrimes{kv.int_list(key("coeffs"))};
    if (variant == "random_density") return RandomDensity{kv.real(key("delta"), 0.5), kv.count(key("seed"), 1)};
    if (variant == "digit_restricted") return DigitRestricted{kv.count(key("d"), 3)};
    if (variant == "explicit") return Explicit{kv.count_list(key("values"))};
    if (variant == "blocks") {
        Blocks b;
        for (const auto& item : split_list(kv.str(key("intervals"), ""))) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw config_error(key("intervals"), "entries must look like lo:hi, got '" + item + "'");
            const auto lo = KeyValues::parse_int(key("intervals"), trim(item.substr(0, colon)));
            const auto hi = KeyValues::parse_int(key("intervals"), trim(item.substr(colon + 1)));
            if (lo < 0 || hi < 0) throw config_error(key("intervals"), "bounds must be nonnegative");
            b.intervals.push_back({static_cast<Index>(lo), static_cast<Index>(hi)});
        }
        return b;
    }
    if (variant == "perturbed") {
        if (!prefix.empty() && prefix != "sequence.")
            throw config_error(key("variant"), "nested perturbed sequences are not supported");
        Perturbed p;
        p.base = std::make_shared<const SequenceSpec>(parse_sequence(kv, prefix + "base."));
        p.seed = kv.count(key("seed"), 1);
        const auto nk = kv.str(key("noise.kind"), "geometric");
        if (nk == "geometric") {
            p.noise.kind = NoiseSpec::Kind::geometric;
            p.noise.p = kv.real(key("noise.p"), 0.5);
        } else if (nk == "uniform") {
            p.noise.kind = NoiseSpec::Kind::uniform;
            p.noise.lo = kv.count(key("noise.lo"), 0);
            p.noise.hi = kv.count(key("noise.hi"), 1);
        } else {
            throw config_error(key("noise.kind"), "unknown value '" + nk + "' (expected geometric, uniform)");
        }
        return p;
    }
    throw config_error(key("variant"), "unknown value '" + variant +
                                           "' (expected natural, poly_floor, log_exp_floor, integer_polynomial, "
                                           "polynomial_of_primes, random_density, blocks, perturbed, "
                                           "digit_restricted, explicit)");
}

inline void emit_sequence(std::ostream& os, const SequenceSpec& spec, const std::string& prefix) {
    const auto num = [](auto v) { return std::to_string(v); };
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Natural>) {
                os << prefix << "variant = natural\n";
            } else if constexpr (std::is_same_v<S, PolyFloor>) {
                os << prefix << "variant = poly_floor\n" << prefix << "gamma = " << format_double(s.gamma) << "\n";
            } else if constexpr (std::is_same_v<S, LogExpFloor>) {
                os << prefix << "variant = log_exp_floor\n" << prefix << "gamma = " << format_double(s.gamma) << "\n";
            } else if constexpr (std::is_same_v<S, IntegerPolynomial>) {
                os << prefix << "variant = integer_polynomial\n" << prefix << "coeffs = " << join(s.coeffs, num) << "\n";
            } else if constexpr (std::is_same_v<S, PolynomialOfPrimes>) {
                os << prefix << "variant = polynomial_of_primes\n" << prefix << "coeffs = " << join(s.coeffs, num) << "\n";
            } else if constexpr (std::is_same_v<S, RandomDensity>) {
                os << prefix << "variant = random_density\n" << prefix << "delta = " << format_double(s.delta) << "\n"
                   << prefix << "seed = " << s.seed << "\n";
            } else if constexpr (std::is_same_v<S, Blocks>) {
                os << prefix << "variant = blocks\n" << prefix << "intervals = "
                   << join(s.intervals, [](const Interval& iv) { return std::to_string(iv.lo) + ":" + std::to_string(iv.hi); })
                   << "\n";
            } else if constexpr (std::is_same_v<S, Perturbed>) {
                os << prefix << "variant = perturbed\n";
                emit_sequence(os, *s.base, prefix + "base.");
                os << prefix << "seed = " << s.seed << "\n";
                if (s.noise.kind == NoiseSpec::Kind::geometric)
                    os << prefix << "noise.kind = geometric\n" << prefix << "noise.p = " << format_double(s.noise.p) << "\n";
                else
                    os << prefix << "noise.kind = uniform\n" << prefix << "noise.lo = " << s.noise.lo << "\n"
                       << prefix << "noise.hi = " << s.noise.hi << "\n";
            } else if constexpr (std::is_same_v<S, DigitRestricted>) {
                os << prefix << "variant = digit_restricted\n" << prefix << "d = " << s.d << "\n";
            } else {
                os << prefix << "variant = explicit\n" << prefix << "values = " << join(s.values, num) << "\n";
            }
        },
        spec);
}

inline GrowthSpec parse_growth(KeyValues& kv, const std::string& prefix, GrowthSpec fallback) {
    GrowthSpec g = fallback;
    const auto kind = kv.str(prefix + "kind", g.kind == GrowthSpec::Kind::power ? "power" : "log");
    if (kind == "power") g.kind = GrowthSpec::Kind::power;
    else if (kind == "log") g.kind = GrowthSpec::Kind::log;
    else throw config_error(prefix + "kind", "unknown value '" + kind + "' (expected power, log)");
    g.coefficient = kv.real(prefix + "coefficient", g.coefficient);
    if (g.kind == GrowthSpec::Kind::power) g.exponent = kv.real(prefix + "exponent", g.exponent);
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(prefix + "exponent", e.what());
    }
    return g;
}

inline void emit_growth(std::ostream& os, const GrowthSpec& g, const std::string& prefix) {
    os << prefix << "kind = " << (g.kind == GrowthSpec::Kind::power ? "power" : "log") << "\n"
       << prefix << "coefficient = " << format_double(g.coefficient) << "\n";
    if (g.kind == GrowthSpec::Kind::power) os << prefix << "exponent = " << format_double(g.exponent) << "\n";
}

/// Maps a validation message "key: text" back to a config_error for that key.
inline config_error as_config_error(const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos && msg.find(' ') > colon) return config_error(msg.substr(0, colon), msg.substr(colon + 2));
    return config_error("", msg);
}

}  // namespace detail

/// Parses the flat `key = value` format; '#' starts a comment.
inline ExperimentConfig parse_config(const std::string& text) {
    detail::KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw config_error("", "line " + std::to_string(lineno) + ": empty key");
        kv.set(key, detail::trim(std::string_view(t).substr(eq + 1)), lineno);
    }

    ExperimentConfig c;
    try {
        c.kind = detail::parse_enum(kv, "experiment.kind", detail::kind_names(), c.kind);
        c.family = detail::parse_family(kv);
        c.s = {kv.real("s.re", c.s.real()), kv.real("s.im", c.s.imag())};
        c.params = {kv.real("map.alpha", 1.0), kv.real("map.beta", 0.0)};
        c.mode = detail::parse_enum(kv, "mode", {{"orbit", SamplingMode::orbit}, {"iid", SamplingMode::iid}}, c.mode);
        if (kv.has("schedule")) c.schedule = kv.count_list("schedule");
        else kv.str("schedule", "");
        c.seeds.master = kv.count("seeds.master", c.seeds.master);
        c.seeds.count = kv.count("seeds.count", c.seeds.count);
        const bool moving = c.kind == ExperimentKind::moving_average;
        if (!moving) c.sequence = detail::parse_sequence(kv, "sequence.");
        if (moving) {
            c.windows.kind = detail::parse_enum(kv, "windows.kind",
                                                {{"full_averages", StoltzKind::Kind::full_averages},
                                                 {"linear", StoltzKind::Kind::linear},
                                                 {"sublinear", StoltzKind::Kind::sublinear}},
                                                c.windows.kind);
            if (c.windows.kind == StoltzKind::Kind::linear) c.windows.c = kv.count("windows.c", 1);
            if (c.windows.kind == StoltzKind::Kind::sublinear)
                c.windows.growth = detail::parse_growth(kv, "windows.growth.", c.windows.growth);
        }
        const bool fixed_transform = c.kind == ExperimentKind::lindelof_moment ||
                                     c.kind == ExperimentKind::rh_log_average ||
                                     c.kind == ExperimentKind::frequency_counts;
        if (!fixed_transform) {
            c.transform = detail::parse_enum(kv, "integrand.transform", detail::transform_names(), c.transform);
            if (c.transform == Transform::abs_power) c.power = kv.real("integrand.power", c.power);
            c.argument_scale = kv.real("integrand.argument_scale", c.argument_scale);
        }
        if (c.kind == ExperimentKind::lindelof_moment) {
            c.transform = Transform::abs_power;
            c.moment_l = static_cast<int>(kv.integer("moment.l", c.moment_l));
            c.power = 2.0 * c.moment_l;
        }
        if (c.kind == ExperimentKind::rh_log_average) {
            c.transform = Transform::log_abs;
            c.argument_scale = 0.5;
        }
        if (c.kind == ExperimentKind::frequency_counts) {
            c.transform = Transform::abs;
            c.m_grid = kv.count_list("frequency.m_grid");
        }
        if (c.transform == Transform::log_abs) c.log_clip = kv.real("integrand.log_clip", c.log_clip);
        if (c.kind == ExperimentKind::variation_stats)
            c.window_growth = detail::parse_growth(kv, "variation.growth.", c.window_growth);
        c.quadrature_reference = kv.boolean("references.quadrature", c.quadrature_reference);
        c.quadrature.truncation = kv.real("quadrature.truncation", c.quadrature.truncation);
        c.quadrature.node_budget = kv.count("quadrature.node_budget", c.quadrature.node_budget);
        c.quadrature.tolerance = kv.real("quadrature.tolerance", c.quadrature.tolerance);
    } catch (const config_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw detail::as_config_error(e);
    }
    kv.require_all_used();
    try {
        validate(c);
    } catch (const config_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw detail::as_config_error(e);
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Fully resolved config text; every defaulted parameter is written out.
inline std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    using detail::join;
    const auto num = [](auto v) { return std::to_string(v); };
    os << "experiment.kind = " << to_string(c.kind) << "\n";
    detail::emit_family(os, c.family);
    os << "s.re = " << format_double(c.s.real()) << "\ns.im = " << format_double(c.s.imag()) << "\n";
    os << "map.alpha = " << format_double(c.params.alpha) << "\nmap.beta = " << format_double(c.params.beta) << "\n";
    os << "mode = " << to_string(c.mode) << "\n";
    os << "schedule = " << join(c.schedule, num) << "\n";
    os << "seeds.master = " << c.seeds.master << "\nseeds.count = " << c.seeds.count << "\n";
    if (c.kind == ExperimentKind::moving_average) {
        const char* wk = c.windows.kind == StoltzKind::Kind::full_averages ? "full_averages"
                         : c.windows.kind == StoltzKind::Kind::linear      ? "linear"
                                                                           : "sublinear";
        os << "windows.kind = " << wk << "\n";
        if (c.windows.kind == StoltzKind::Kind::linear) os << "windows.c = " << c.windows.c << "\n";
        if (c.windows.kind == StoltzKind::Kind::sublinear) detail::emit_growth(os, c.windows.growth, "windows.growth.");
    } else {
        detail::emit_sequence(os, c.sequence, "sequence.");
    }
    const bool fixed_transform = c.kind == ExperimentKind::lindelof_moment || c.kind == ExperimentKind::rh_log_average ||
                                 c.kind == ExperimentKind::frequency_counts;
    if (!fixed_transform) {
        os << "integrand.transform = " << to_string(c.transform) << "\n";
        if (c.transform == Transform::abs_power) os << "integrand.power = " << format_double(c.power) << "\n";
        os << "integrand.argument_scale = " << format_double(c.argument_scale) << "\n";
    }
    const bool log_transform = c.kind == ExperimentKind::rh_log_average ||
                               (!fixed_transform && c.transform == Transform::log_abs);
    if (log_transform) os << "integrand.log_clip = " << format_double(c.log_clip) << "\n";
    if (c.kind == ExperimentKind::lindelof_moment) os << "moment.l = " << c.moment_l << "\n";
    if (c.kind == ExperimentKind::frequency_counts) os << "frequency.m_grid = " << join(c.m_grid, num) << "\n";
    if (c.kind == ExperimentKind::variation_stats) detail::emit_growth(os, c.window_growth, "variation.growth.");
    os << "references.quadrature = " << (c.quadrature_reference ? "true" : "false") << "\n";
    os << "quadrature.truncation = " << format_double(c.quadrature.truncation) << "\n";
    os << "quadrature.node_budget = " << c.quadrature.node_budget << "\n";
    os << "quadrature.tolerance = " << format_double(c.quadrature.tolerance) << "\n";
    return os.str();
}

}  // namespace boolezeta
