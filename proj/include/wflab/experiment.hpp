#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "action.hpp"
#include "bounds.hpp"
#include "conjugate.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "kernel_io.hpp"
#include "minorant.hpp"
#include "report_io.hpp"
#include "simulate.hpp"
#include "target.hpp"

namespace wflab {

inline constexpr char kVersion[] = "0.1.0";
inline constexpr int kSchemaVersion = 1;

//---------------------------------------------------------------------------//
// Command blocks

struct ConjugateBlock
{
    Vector x;
    std::vector<Vector> alphas;
};

struct ActionBlock
{
    Vector x;
    //! Exactly one of y and target is set.
    std::optional<Vector> y;
    std::optional<TargetSet> target;
    int segments = 50;
    int restarts = 8;
    double perturbation = 0.1;
    double horizon = 1.0;
    int grid_per_axis = 9;
};

struct ObservableSpec
{
    //! "indicator" of target, or "coordinate" k of the state.
    std::string kind = "indicator";
    std::optional<TargetSet> target;
    int index = 0;
};

struct SimulateBlock
{
    double h = 0.1;
    double horizon = 1.0;
    Vector x0;
    std::size_t n_paths = 10000;
    std::size_t max_events = 0;
    double substep_fraction = 0.1;
    ObservableSpec observable;
    //! Number of leading paths dumped to trajectories.csv.
    std::size_t trajectories = 0;
};

struct VerifyBlock
{
    Vector x0;
    std::optional<TargetSet> target;
    std::vector<double> h_list{0.2, 0.1, 0.05, 0.02};
    std::size_t n_paths = 100000;
    std::string tilt_policy = "auto";
    double plain_from_h = 0.5;
    double tolerance_base = 0.15;
    double tolerance_slope = 2.0;
    double horizon = 1.0;
    int segments = 50;
    int restarts = 8;
    int grid_per_axis = 9;
};

struct CheckBlock
{
    double radius = 1.0;
    Vector x_lower;
    Vector x_upper;
    std::size_t x_probes = 32;
    int points_per_axis = 32;
    double xi_radius = 2.0;
};

struct BoundsBlock
{
    Vector x;
    std::vector<double> t_list{0.1};
    std::vector<double> h_list{0.1};
    std::vector<double> radius_list{1.0};
    //! Empty means the 2d axis directions.
    std::vector<Vector> directions;
    //! Plain Monte Carlo exit estimate per row; 0 disables it.
    std::size_t n_paths = 0;
};

struct MinorantBlock
{
    Vector x;
    double radius = 1.0;
    double chi = 0.05;
    int coarse_cells_per_axis = 4;
    std::size_t max_support_points = 4096;
};

struct ExperimentConfig
{
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    std::string output = "wflab-out";
    std::string model_id = "model";
    //! Set when the model was given as a file path.
    std::optional<std::string> model_path;
    std::optional<JumpKernel> model;

    std::optional<ConjugateBlock> conjugate;
    std::optional<ActionBlock> action;
    std::optional<SimulateBlock> simulate;
    std::optional<VerifyBlock> verify;
    std::optional<CheckBlock> check;
    std::optional<BoundsBlock> bounds;
    std::optional<MinorantBlock> minorant;

    //! Name of the single command block present.
    std::string block() const
    {
        if (conjugate)
            return "conjugate";
        if (action)
            return "action";
        if (simulate)
            return "simulate";
        if (verify)
            return "verify";
        if (check)
            return "check";
        if (bounds)
            return "bounds";
        if (minorant)
            return "minorant";
        return "";
    }

    JumpKernel const& kernel() const { return *model; }
};

inline constexpr std::pair<char const*, char const*> kCommandBlocks[] = {
    {"conjugate", "conjugate"},
    {"rate", "action"},
    {"simulate", "simulate"},
    {"verify-ldp", "verify"},
    {"check-hypotheses", "check"},
    {"bounds", "bounds"},
    {"minorant", "minorant"},
};

inline std::optional<std::string> block_for_command(std::string const& cmd)
{
    for (auto const& [c, b] : kCommandBlocks)
    {
        if (cmd == c)
            return b;
    }
    return std::nullopt;
}

//---------------------------------------------------------------------------//
// JSON field access with unknown-key detection

namespace config_detail {

class Fields
{
  public:
    Fields(Json const& j, std::string where) : j_{j}, where_{std::move(where)}
    {
        if (!j.is_object())
            throw ValidationError{where_ + " must be an object"};
    }

    bool has(char const* key)
    {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    Json const& at(char const* key)
    {
        if (!has(key))
            throw ValidationError{where_ + ": missing '" + key + "'"};
        return j_.at(key);
    }

    double number(char const* key)
    {
        return number_from_json(at(key), (where_ + "." + key).c_str());
    }

    double number(char const* key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    long long integer(char const* key, long long fallback, long long lo = 0)
    {
        if (!has(key))
            return fallback;
        auto const& v = j_.at(key);
        if (!v.is_number_integer())
            throw ValidationError{where_ + "." + key + " must be an integer"};
        auto n = v.get<long long>();
        if (n < lo)
            throw ValidationError{where_ + "." + key + " must be >= "
                                  + std::to_string(lo)};
        return n;
    }

    std::size_t count(char const* key, std::size_t fallback)
    {
        return static_cast<std::size_t>(
            integer(key, static_cast<long long>(fallback)));
    }

    std::string string(char const* key, std::string fallback)
    {
        if (!has(key))
            return fallback;
        if (!j_.at(key).is_string())
            throw ValidationError{where_ + "." + key + " must be a string"};
        return j_.at(key).get<std::string>();
    }

    Vector vector(char const* key)
    {
        auto const& v = at(key);
        if (v.is_number())
            return Vector::Constant(1, v.get<double>());
        return json_detail::to_vector(v, (where_ + "." + key).c_str());
    }

    std::vector<double> numbers(char const* key, std::vector<double> fallback)
    {
        if (!has(key))
            return fallback;
        auto v = vector(key);
        return {v.data(), v.data() + v.size()};
    }

    //! List of vectors; bare numbers are read as 1-vectors.
    std::vector<Vector> vectors(char const* key)
    {
        auto const& v = at(key);
        if (!v.is_array())
            throw ValidationError{where_ + "." + key + " must be an array"};
        std::vector<Vector> out;
        for (auto const& e : v)
        {
            if (e.is_number())
                out.push_back(Vector::Constant(1, e.get<double>()));
            else
                out.push_back(json_detail::to_vector(e, key));
        }
        return out;
    }

    void finish() const
    {
        for (auto const& [key, value] : j_.items())
        {
            if (!used_.count(key))
                throw ValidationError{where_ + ": unknown field '" + key
                                      + "'"};
        }
    }

  private:
    Json const& j_;
    std::string where_;
    std::set<std::string> used_;
};

inline TargetSet target_from_json(Json const& j)
{
    Fields f{j, "target"};
    std::optional<TargetSet> out;
    int shapes = 0;
    if (f.has("box"))
    {
        Fields b{f.at("box"), "target.box"};
        out = TargetSet{Box{b.vector("lower"), b.vector("upper")}};
        b.finish();
        ++shapes;
    }
    if (f.has("ball"))
    {
        Fields b{f.at("ball"), "target.ball"};
        out = TargetSet{Ball{b.vector("center"), b.number("radius")}};
        b.finish();
        ++shapes;
    }
    if (f.has("interval"))
    {
        auto v = f.vector("interval");
        if (v.size() != 2)
            throw ValidationError{"target.interval needs [lo, hi]"};
        out = TargetSet::interval(v[0], v[1]);
        ++shapes;
    }
    f.finish();
    if (shapes != 1)
        throw ValidationError{"target needs exactly one of box, ball, interval"};
    return *out;
}

inline Json target_to_json(TargetSet const& t)
{
    Json j;
    if (auto* b = std::get_if<Ball>(&t.shape()))
    {
        j["ball"]["center"] = vector_json(b->center);
        j["ball"]["radius"] = b->radius;
    }
    else
    {
        auto const& box = std::get<Box>(t.shape());
        j["box"]["lower"] = vector_json(box.lower);
        j["box"]["upper"] = vector_json(box.upper);
    }
    return j;
}

inline Json vectors_json(std::vector<Vector> const& vs)
{
    Json out = Json::array();
    for (auto const& v : vs)
        out.push_back(vector_json(v));
    return out;
}

inline Json numbers_json(std::vector<double> const& vs)
{
    Json out = Json::array();
    for (double v : vs)
        out.push_back(number_json(v));
    return out;
}

inline void require_dim(Vector const& v, int dim, std::string const& what)
{
    if (v.size() != dim)
        throw ValidationError{what + " has dimension "
                              + std::to_string(v.size()) + ", model has "
                              + std::to_string(dim)};
}

inline void require_dim(TargetSet const& t, int dim, std::string const& what)
{
    if (t.dim() != dim)
        throw ValidationError{what + " dimension does not match the model"};
}

}  // namespace config_detail

//---------------------------------------------------------------------------//
// Parsing

/*!
 * Build a config from JSON. Relative model paths resolve against base_dir.
 */
inline ExperimentConfig config_from_json(Json const& j,
                                         std::filesystem::path const& base_dir = {})
{
    using namespace config_detail;
    Fields f{j, "config"};
    ExperimentConfig c;
    c.schema_version = static_cast<int>(f.integer("schema_version", -1));
    if (c.schema_version != kSchemaVersion)
        throw ValidationError{"unsupported schema_version (expected "
                              + std::to_string(kSchemaVersion) + ")"};
    c.seed = static_cast<std::uint64_t>(f.integer("seed", 0));
    c.output = f.string("output", c.output);
    c.model_id = f.string("model_id", c.model_id);

    auto const& m = f.at("model");
    if (m.is_string())
    {
        c.model_path = m.get<std::string>();
        std::filesystem::path p{*c.model_path};
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        if (!std::filesystem::exists(p))
            throw ValidationError{"model file '" + p.string()
                                  + "' does not exist"};
        c.model = kernel_from_json(parse_json_text(read_text_file(p.string())));
    }
    else
    {
        c.model = kernel_from_json(m);
    }
    int const dim = c.model->dim();

    int blocks = 0;
    if (f.has("conjugate"))
    {
        ++blocks;
        Fields b{f.at("conjugate"), "conjugate"};
        ConjugateBlock blk{b.vector("x"), b.vectors("alpha")};
        b.finish();
        require_dim(blk.x, dim, "conjugate.x");
        if (blk.alphas.empty())
            throw ValidationError{"conjugate.alpha is empty"};
        for (auto const& a : blk.alphas)
            require_dim(a, dim, "conjugate.alpha entry");
        c.conjugate = std::move(blk);
    }
    if (f.has("action"))
    {
        ++blocks;
        Fields b{f.at("action"), "action"};
        ActionBlock blk;
        blk.x = b.vector("x");
        require_dim(blk.x, dim, "action.x");
        if (b.has("y"))
        {
            blk.y = b.vector("y");
            require_dim(*blk.y, dim, "action.y");
        }
        if (b.has("target"))
        {
            blk.target = target_from_json(b.at("target"));
            require_dim(*blk.target, dim, "action.target");
        }
        if (blk.y.has_value() == blk.target.has_value())
            throw ValidationError{"action needs exactly one of y and target"};
        blk.segments = static_cast<int>(b.integer("segments", blk.segments, 2));
        blk.restarts = static_cast<int>(b.integer("restarts", blk.restarts, 1));
        blk.perturbation = b.number("perturbation", blk.perturbation);
        blk.horizon = b.number("horizon", blk.horizon);
        blk.grid_per_axis
            = static_cast<int>(b.integer("grid_per_axis", blk.grid_per_axis, 1));
        b.finish();
        c.action = std::move(blk);
    }
    if (f.has("simulate"))
    {
        ++blocks;
        Fields b{f.at("simulate"), "simulate"};
        SimulateBlock blk;
        blk.h = b.number("h", blk.h);
        blk.horizon = b.number("horizon", blk.horizon);
        blk.x0 = b.vector("x0");
        require_dim(blk.x0, dim, "simulate.x0");
        blk.n_paths = b.count("n_paths", blk.n_paths);
        blk.max_events = b.count("max_events", blk.max_events);
        blk.substep_fraction = b.number("substep_fraction", blk.substep_fraction);
        blk.trajectories = b.count("trajectories", blk.trajectories);
        if (b.has("observable"))
        {
            Fields o{b.at("observable"), "simulate.observable"};
            blk.observable.kind = o.string("kind", "indicator");
            if (blk.observable.kind == "indicator")
            {
                blk.observable.target = target_from_json(o.at("target"));
                require_dim(*blk.observable.target, dim, "observable.target");
            }
            else if (blk.observable.kind == "coordinate")
            {
                blk.observable.index = static_cast<int>(o.integer("index", 0));
                if (blk.observable.index >= dim)
                    throw ValidationError{"observable.index out of range"};
            }
            else
            {
                throw ValidationError{"observable.kind must be indicator or "
                                      "coordinate"};
            }
            o.finish();
        }
        else
        {
            throw ValidationError{"simulate needs an observable"};
        }
        b.finish();
        c.simulate = std::move(blk);
    }
    if (f.has("verify"))
    {
        ++blocks;
        Fields b{f.at("verify"), "verify"};
        VerifyBlock blk;
        blk.x0 = b.vector("x0");
        require_dim(blk.x0, dim, "verify.x0");
        blk.target = target_from_json(b.at("target"));
        require_dim(*blk.target, dim, "verify.target");
        blk.h_list = b.numbers("h_list", blk.h_list);
        blk.n_paths = b.count("n_paths", blk.n_paths);
        blk.tilt_policy = b.string("tilt_policy", blk.tilt_policy);
        if (blk.tilt_policy != "auto" && blk.tilt_policy != "plain"
            && blk.tilt_policy != "tilted")
            throw ValidationError{"verify.tilt_policy must be auto, plain or "
                                  "tilted"};
        blk.plain_from_h = b.number("plain_from_h", blk.plain_from_h);
        blk.tolerance_base = b.number("tolerance_base", blk.tolerance_base);
        blk.tolerance_slope = b.number("tolerance_slope", blk.tolerance_slope);
        blk.horizon = b.number("horizon", blk.horizon);
        blk.segments = static_cast<int>(b.integer("segments", blk.segments, 2));
        blk.restarts = static_cast<int>(b.integer("restarts", blk.restarts, 1));
        blk.grid_per_axis
            = static_cast<int>(b.integer("grid_per_axis", blk.grid_per_axis, 1));
        b.finish();
        c.verify = std::move(blk);
    }
    if (f.has("check"))
    {
        ++blocks;
        Fields b{f.at("check"), "check"};
        CheckBlock blk;
        blk.radius = b.number("R", blk.radius);
        blk.x_lower = b.vector("x_lower");
        blk.x_upper = b.vector("x_upper");
        require_dim(blk.x_lower, dim, "check.x_lower");
        require_dim(blk.x_upper, dim, "check.x_upper");
        blk.x_probes = b.count("x_probes", blk.x_probes);
        blk.points_per_axis = static_cast<int>(
            b.integer("points_per_axis", blk.points_per_axis, 2));
        blk.xi_radius = b.number("xi_radius", blk.xi_radius);
        b.finish();
        c.check = std::move(blk);
    }
    if (f.has("bounds"))
    {
        ++blocks;
        Fields b{f.at("bounds"), "bounds"};
        BoundsBlock blk;
        blk.x = b.vector("x");
        require_dim(blk.x, dim, "bounds.x");
        blk.t_list = b.numbers("t_list", blk.t_list);
        blk.h_list = b.numbers("h_list", blk.h_list);
        blk.radius_list = b.numbers("radius_list", blk.radius_list);
        if (b.has("directions"))
        {
            blk.directions = b.vectors("directions");
            for (auto const& d : blk.directions)
                require_dim(d, dim, "bounds.directions entry");
        }
        blk.n_paths = b.count("n_paths", blk.n_paths);
        b.finish();
        c.bounds = std::move(blk);
    }
    if (f.has("minorant"))
    {
        ++blocks;
        Fields b{f.at("minorant"), "minorant"};
        MinorantBlock blk;
        blk.x = b.vector("x");
        require_dim(blk.x, dim, "minorant.x");
        blk.radius = b.number("R", blk.radius);
        blk.chi = b.number("chi", blk.chi);
        blk.coarse_cells_per_axis = static_cast<int>(
            b.integer("coarse_cells_per_axis", blk.coarse_cells_per_axis, 1));
        blk.max_support_points
            = b.count("max_support_points", blk.max_support_points);
        b.finish();
        c.minorant = std::move(blk);
    }
    f.finish();
    if (blocks != 1)
        throw ValidationError{"config needs exactly one command block, found "
                              + std::to_string(blocks)};
    return c;
}

inline Json config_to_json(ExperimentConfig const& c)
{
    using namespace config_detail;
    Json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["model_id"] = c.model_id;
    if (c.model_path)
        j["model"] = *c.model_path;
    else if (c.model)
        j["model"] = kernel_to_json(*c.model);

    if (c.conjugate)
    {
        j["conjugate"]["x"] = vector_json(c.conjugate->x);
        j["conjugate"]["alpha"] = vectors_json(c.conjugate->alphas);
    }
    if (c.action)
    {
        auto const& a = *c.action;
        Json& b = j["action"];
        b["x"] = vector_json(a.x);
        if (a.y)
            b["y"] = vector_json(*a.y);
        if (a.target)
            b["target"] = target_to_json(*a.target);
        b["segments"] = a.segments;
        b["restarts"] = a.restarts;
        b["perturbation"] = a.perturbation;
        b["horizon"] = a.horizon;
        b["grid_per_axis"] = a.grid_per_axis;
    }
    if (c.simulate)
    {
        auto const& s = *c.simulate;
        Json& b = j["simulate"];
        b["h"] = s.h;
        b["horizon"] = s.horizon;
        b["x0"] = vector_json(s.x0);
        b["n_paths"] = s.n_paths;
        b["max_events"] = s.max_events;
        b["substep_fraction"] = s.substep_fraction;
        b["trajectories"] = s.trajectories;
        Json& o = b["observable"];
        o["kind"] = s.observable.kind;
        if (s.observable.target)
            o["target"] = target_to_json(*s.observable.target);
        else
            o["index"] = s.observable.index;
    }
    if (c.verify)
    {
        auto const& v = *c.verify;
        Json& b = j["verify"];
        b["x0"] = vector_json(v.x0);
        b["target"] = target_to_json(*v.target);
        b["h_list"] = numbers_json(v.h_list);
        b["n_paths"] = v.n_paths;
        b["tilt_policy"] = v.tilt_policy;
        b["plain_from_h"] = v.plain_from_h;
        b["tolerance_base"] = v.tolerance_base;
        b["tolerance_slope"] = v.tolerance_slope;
        b["horizon"] = v.horizon;
        b["segments"] = v.segments;
        b["restarts"] = v.restarts;
        b["grid_per_axis"] = v.grid_per_axis;
    }
    if (c.check)
    {
        auto const& k = *c.check;
        Json& b = j["check"];
        b["R"] = k.radius;
        b["x_lower"] = vector_json(k.x_lower);
        b["x_upper"] = vector_json(k.x_upper);
        b["x_probes"] = k.x_probes;
        b["points_per_axis"] = k.points_per_axis;
        b["xi_radius"] = k.xi_radius;
    }
    if (c.bounds)
    {
        auto const& k = *c.bounds;
        Json& b = j["bounds"];
        b["x"] = vector_json(k.x);
        b["t_list"] = numbers_json(k.t_list);
        b["h_list"] = numbers_json(k.h_list);
        b["radius_list"] = numbers_json(k.radius_list);
        if (!k.directions.empty())
            b["directions"] = vectors_json(k.directions);
        b["n_paths"] = k.n_paths;
    }
    if (c.minorant)
    {
        auto const& k = *c.minorant;
        Json& b = j["minorant"];
        b["x"] = vector_json(k.x);
        b["R"] = k.radius;
        b["chi"] = k.chi;
        b["coarse_cells_per_axis"] = k.coarse_cells_per_axis;
        b["max_support_points"] = k.max_support_points;
    }
    return j;
}

//---------------------------------------------------------------------------//
// Overrides

//! Set the dotted key in j to value; value is parsed as JSON, else a string.
inline void apply_override(Json& j, std::string const& assignment)
{
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError{"override '" + assignment
                              + "' is not key=value"};
    std::string key = assignment.substr(0, eq);
    std::string text = assignment.substr(eq + 1);
    Json value;
    try
    {
        value = Json::parse(text);
    }
    catch (Json::parse_error const&)
    {
        value = text;
    }
    Json* node = &j;
    std::size_t start = 0;
    while (true)
    {
        auto dot = key.find('.', start);
        auto part = key.substr(start, dot - start);
        if (part.empty())
            throw ValidationError{"override key '" + key + "' is malformed"};
        if (!node->is_object())
            throw ValidationError{"override '" + key
                                  + "' descends into a non-object"};
        if (dot == std::string::npos)
        {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        if (node->is_null())
            *node = Json::object();
        start = dot + 1;
    }
}

struct Overrides
{
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> out;
    std::vector<std::string> assignments;
};

//! Applies the flag overrides to raw config JSON for the given block.
inline void apply_overrides(Json& j,
                            std::string const& block,
                            Overrides const& o)
{
    for (auto const& a : o.assignments)
        apply_override(j, a);
    if (o.seed)
        j["seed"] = *o.seed;
    if (o.out)
        j["output"] = *o.out;
    if (o.paths)
    {
        if (block != "simulate" && block != "verify" && block != "bounds")
            throw ValidationError{"--paths does not apply to '" + block + "'"};
        if (!j.contains(block) || !j[block].is_object())
            throw ValidationError{"config has no '" + block + "' block"};
        j[block]["n_paths"] = *o.paths;
    }
}

//---------------------------------------------------------------------------//
// Running

//! Exit statuses of run_experiment.
enum class ExitStatus : int
{
    ok = 0,
    failure = 1,
    validation = 2,
    hypothesis_violation = 3,
    insufficient_samples = 4,
};

struct RunResult
{
    ExitStatus status = ExitStatus::ok;
    std::filesystem::path output_dir;
    Json report;
    std::vector<std::pair<std::string, std::string>> tables;
};

namespace experiment_detail {

inline Json table_rows(CsvTable const& t)
{
    // Row objects mirror the CSV columns for plot-ready JSON consumers.
    Json rows = Json::array();
    auto text = t.str();
    std::size_t pos = text.find('\n') + 1;
    while (pos < text.size())
    {
        auto end = text.find('\n', pos);
        auto line = text.substr(pos, end - pos);
        Json row = Json::object();
        std::size_t col = 0;
        std::size_t s = 0;
        while (true)
        {
            auto comma = line.find(',', s);
            row[t.header()[col++]] = line.substr(s, comma - s);
            if (comma == std::string::npos)
                break;
            s = comma + 1;
        }
        rows.push_back(std::move(row));
        pos = end + 1;
    }
    return rows;
}

struct Context
{
    ExperimentConfig const& cfg;
    RunResult& out;
    Json& results;

    void table(std::string name, CsvTable const& t)
    {
        out.tables.emplace_back(std::move(name), t.str());
    }
};

inline void run_conjugate(Context& ctx)
{
    auto const& b = *ctx.cfg.conjugate;
    auto const& k = ctx.cfg.kernel();
    FrozenHamiltonian ham{k, b.x};
    std::vector<ConjugateRow> rows;
    for (auto const& a : b.alphas)
    {
        auto outcome = solve_legendre(ham, a);
        ConjugateRow r{b.x, a, ExtendedReal::infinity(), std::nullopt, 0};
        if (auto* c = std::get_if<ConjugateResult>(&outcome))
        {
            r.value = ExtendedReal{c->value};
            r.maximizer = c->maximizer;
            r.iterations = c->iterations;
        }
        rows.push_back(std::move(r));
    }
    auto t = conjugate_csv(rows, k.dim());
    ctx.table("conjugate.csv", t);
    ctx.out.report["rows"] = table_rows(t);
}

inline void run_rate(Context& ctx)
{
    auto const& b = *ctx.cfg.action;
    auto const& k = ctx.cfg.kernel();
    MinimizeOptions mo;
    mo.restarts = b.restarts;
    mo.perturbation = b.perturbation;
    mo.horizon = b.horizon;
    mo.seed = ctx.cfg.seed;
    if (b.y)
    {
        auto r = minimize_action(k, b.x, *b.y, b.segments, mo);
        ctx.results["value"] = number_json(r.value);
        ctx.results["argmin"] = vector_json(*b.y);
        ctx.results["restarts_used"] = r.restarts_used;
        ctx.results["gradient_norm_at_exit"]
            = number_json(r.gradient_norm_at_exit);
        ctx.results["straight_line_value"] = number_json(r.straight_line_value);
        auto t = path_csv(r.path);
        ctx.table("path.csv", t);
        ctx.out.report["rows"] = table_rows(t);
    }
    else
    {
        RateToSetOptions ro;
        ro.segments = b.segments;
        ro.grid_per_axis = b.grid_per_axis;
        ro.minimize = mo;
        auto r = rate_to_set(k, b.x, *b.target, ro);
        ctx.results = rate_json(r);
        ctx.results["target"] = b.target->describe();
        auto t = path_csv(r.detail.path);
        ctx.table("path.csv", t);
        ctx.out.report["rows"] = table_rows(t);
    }
}

inline void run_simulate(Context& ctx)
{
    auto const& b = *ctx.cfg.simulate;
    auto const& k = ctx.cfg.kernel();
    SimConfig sc;
    sc.h = b.h;
    sc.horizon = b.horizon;
    sc.x0 = b.x0;
    sc.n_paths = b.n_paths;
    sc.seed = ctx.cfg.seed;
    sc.max_events = b.max_events;
    sc.substep_fraction = b.substep_fraction;
    Json warnings = Json::array();
    for (auto const& w : validate_sim_config(k, sc))
        warnings.push_back(w);
    ctx.results["warnings"] = std::move(warnings);

    Observable f;
    if (b.observable.kind == "indicator")
        f = indicator(*b.observable.target);
    else
        f = [i = b.observable.index](Vector const& x) { return x[i]; };
    auto est = estimate_semigroup(k, sc, f);
    ctx.results["estimate"] = estimate_json(est);
    auto t = estimate_csv({{"P_t^h[f](x0)", est}});
    ctx.table("estimate.csv", t);
    ctx.out.report["rows"] = table_rows(t);

    if (b.trajectories > 0)
    {
        std::vector<Trajectory> paths;
        for (std::size_t i = 0; i < std::min(b.trajectories, b.n_paths); ++i)
        {
            RandomStream rng{sc.seed, i};
            paths.push_back(sample_path(k, sc, rng));
        }
        ctx.table("trajectories.csv", trajectory_csv(paths, k.dim()));
    }
}

inline ExitStatus run_verify(Context& ctx)
{
    auto const& b = *ctx.cfg.verify;
    LdpOptions lo;
    lo.h_list = b.h_list;
    lo.n_paths = b.n_paths;
    lo.seed = ctx.cfg.seed;
    lo.policy = b.tilt_policy == "plain"    ? TiltPolicy::plain
                : b.tilt_policy == "tilted" ? TiltPolicy::tilted
                                            : TiltPolicy::automatic;
    lo.plain_from_h = b.plain_from_h;
    lo.tolerance_base = b.tolerance_base;
    lo.tolerance_slope = b.tolerance_slope;
    lo.horizon = b.horizon;
    lo.model_id = ctx.cfg.model_id;
    lo.rate.segments = b.segments;
    lo.rate.grid_per_axis = b.grid_per_axis;
    lo.rate.minimize.restarts = b.restarts;
    lo.rate.minimize.seed = ctx.cfg.seed;
    auto rep = ldp_report(ctx.cfg.kernel(), b.x0, *b.target, lo);
    auto j = ldp_json(rep);
    ctx.out.report["rows"] = j["rows"];
    j.erase("rows");
    ctx.results = std::move(j);
    ctx.table("ldp.csv", ldp_csv(rep));
    if (rep.insufficient())
    {
        ctx.out.report["errors"].push_back(
            {{"code", "insufficient_samples"},
             {"message", "stderr / p_hat > 0.5 in at least one row"}});
        return ExitStatus::insufficient_samples;
    }
    return ExitStatus::ok;
}

inline ProbeConfig probe_config(CheckBlock const& b)
{
    ProbeConfig pc;
    pc.x_lower = b.x_lower;
    pc.x_upper = b.x_upper;
    pc.x_probes = b.x_probes;
    pc.points_per_axis = b.points_per_axis;
    pc.xi_radius = b.xi_radius;
    return pc;
}

inline ExitStatus run_check(Context& ctx)
{
    auto const& b = *ctx.cfg.check;
    auto const& k = ctx.cfg.kernel();
    auto emit = [&](DiagnosticsReport const& r) {
        ctx.results = diagnostics_json(r);
        ctx.out.report["rows"] = ctx.results["failures"];
        ctx.table("continuity.csv", continuity_csv(r));
        ctx.table("superlinearity.csv", superlinearity_csv(r, k.dim()));
        ctx.table("failures.csv", failures_csv(r));
    };
    try
    {
        DominatingHamiltonian h1{k};
        emit(check_hypotheses(k, h1, b.radius, probe_config(b)));
        return ExitStatus::ok;
    }
    catch (HypothesisViolation const& e)
    {
        emit(e.report());
        throw;
    }
}

inline void run_bounds(Context& ctx)
{
    auto const& b = *ctx.cfg.bounds;
    auto const& k = ctx.cfg.kernel();
    RateProfile profile{k};
    CsvTable table{{"t", "h", "radius", "bound", "mc_p_hat", "mc_stderr",
                    "dominated"}};
    Json details = Json::array();
    std::uint64_t row = 0;
    for (double t : b.t_list)
    {
        for (double h : b.h_list)
        {
            for (double radius : b.radius_list)
            {
                auto dirs = b.directions.empty()
                                ? DirectionSet::axes(k.dim(), radius)
                                : DirectionSet::from_vectors(b.directions,
                                                             radius);
                auto cb = chernoff_exit_bound(profile, t, h, dirs);
                details.push_back(chernoff_json(dirs, cb, t, h));
                std::vector<std::string> cells{format_double(t),
                                               format_double(h),
                                               format_double(radius),
                                               format_double(cb.total)};
                if (b.n_paths > 0)
                {
                    SimConfig sc;
                    sc.h = h;
                    sc.horizon = t;
                    sc.x0 = b.x;
                    sc.n_paths = b.n_paths;
                    sc.seed = mix_seed(ctx.cfg.seed, row);
                    Vector x = b.x;
                    auto est = estimate_semigroup(
                        k, sc, [x, radius](Vector const& y) {
                            return (y - x).norm() >= radius ? 1.0 : 0.0;
                        });
                    cells.push_back(format_double(est.mean));
                    cells.push_back(format_double(est.std_error));
                    cells.push_back(
                        est.mean <= cb.total + 4 * est.std_error ? "true"
                                                                 : "false");
                }
                else
                {
                    cells.insert(cells.end(), {"nan", "nan", "n/a"});
                }
                table.add_row(std::move(cells));
                ++row;
            }
        }
    }
    ctx.results["bounds"] = std::move(details);
    ctx.table("bounds.csv", table);
    ctx.out.report["rows"] = table_rows(table);
}

inline void run_minorant(Context& ctx)
{
    auto const& b = *ctx.cfg.minorant;
    auto const& k = ctx.cfg.kernel();
    MinorantOptions mo;
    mo.coarse_cells_per_axis = b.coarse_cells_per_axis;
    mo.max_support_points = b.max_support_points;
    auto m = build_minorant(k, b.x, b.radius, b.chi, mo);
    ctx.results = minorant_json(m);
    auto t = minorant_csv(m, k.dim());
    ctx.table("minorant.csv", t);
    ctx.out.report["rows"] = table_rows(t);
}

inline ExitStatus status_for(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::validation:
            return ExitStatus::validation;
        case ErrorCode::hypothesis_violation:
            return ExitStatus::hypothesis_violation;
        case ErrorCode::insufficient_samples:
            return ExitStatus::insufficient_samples;
        default:
            return ExitStatus::failure;
    }
}

}  // namespace experiment_detail

/*!
 * Run one subcommand on an already-loaded config and fill the report.
 *
 * Nothing is written to disk; see write_run for that.
 */
inline RunResult execute(ExperimentConfig const& cfg, std::string const& command)
{
    using namespace experiment_detail;
    RunResult out;
    out.output_dir = cfg.output;
    out.report["schema_version"] = kSchemaVersion;
    out.report["command"] = command;
    out.report["version"] = kVersion;
    out.report["seed"] = cfg.seed;
    out.report["config"] = config_to_json(cfg);
    out.report["status"] = 0;
    out.report["results"] = Json::object();
    out.report["rows"] = Json::array();
    out.report["errors"] = Json::array();

    Json results = Json::object();
    Context ctx{cfg, out, results};
    try
    {
        auto block = block_for_command(command);
        if (!block)
            throw ValidationError{"unknown subcommand '" + command + "'"};
        if (cfg.block() != *block)
            throw ValidationError{"subcommand '" + command + "' needs a '"
                                  + *block + "' block, config has '"
                                  + cfg.block() + "'"};
        if (command == "conjugate")
            run_conjugate(ctx);
        else if (command == "rate")
            run_rate(ctx);
        else if (command == "simulate")
            run_simulate(ctx);
        else if (command == "verify-ldp")
            out.status = run_verify(ctx);
        else if (command == "check-hypotheses")
            out.status = run_check(ctx);
        else if (command == "bounds")
            run_bounds(ctx);
        else if (command == "minorant")
            run_minorant(ctx);
    }
    catch (Error const& e)
    {
        out.status = status_for(e.code());
        out.report["errors"].push_back(
            {{"code", to_string(e.code())}, {"message", e.what()}});
    }
    catch (std::exception const& e)
    {
        out.status = ExitStatus::failure;
        out.report["errors"].push_back(
            {{"code", "internal"}, {"message", e.what()}});
    }
    out.report["results"] = std::move(results);
    out.report["status"] = static_cast<int>(out.status);
    return out;
}

//! Writes report.json and every CSV table under the output directory.
inline void write_run(RunResult const& run)
{
    std::error_code ec;
    std::filesystem::create_directories(run.output_dir, ec);
    if (ec)
        throw IoError{"cannot create '" + run.output_dir.string()
                      + "': " + ec.message()};
    write_text_file((run.output_dir / "report.json").string(),
                    dump_json(run.report));
    for (auto const& [name, body] : run.tables)
        write_text_file((run.output_dir / name).string(), body);
}

inline ExperimentConfig load_config(std::string const& path,
                                    std::string const& command,
                                    Overrides const& overrides = {})
{
    auto j = parse_json_text(read_text_file(path));
    if (auto block = block_for_command(command))
        apply_overrides(j, *block, overrides);
    else
        throw ValidationError{"unknown subcommand '" + command + "'"};
    return config_from_json(j, std::filesystem::path{path}.parent_path());
}

//---------------------------------------------------------------------------//
/*!
 * Load, run and emit. Errors end up in report.json when an output directory
 * is known; config errors before that only produce the exit status.
 */
inline RunResult run_experiment(std::string const& config_path,
                                std::string const& command,
                                Overrides const& overrides = {})
{
    RunResult out;
    std::optional<ExperimentConfig> cfg;
    try
    {
        cfg = load_config(config_path, command, overrides);
    }
    catch (Error const& e)
    {
        out.status = experiment_detail::status_for(e.code());
        out.report["schema_version"] = kSchemaVersion;
        out.report["command"] = command;
        out.report["version"] = kVersion;
        out.report["status"] = static_cast<int>(out.status);
        out.report["rows"] = Json::array();
        out.report["errors"] = Json::array(
            {{{"code", to_string(e.code())}, {"message", e.what()}}});
        if (overrides.out)
        {
            out.output_dir = *overrides.out;
            write_run(out);
        }
        return out;
    }
    out = execute(*cfg, command);
    write_run(out);
    return out;
}

}  // namespace wflab
