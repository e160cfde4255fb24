#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "kernel.hpp"

namespace wflab {

using Json = nlohmann::ordered_json;

namespace json_detail {

inline Vector to_vector(Json const& j, char const* what)
{
    if (!j.is_array())
        throw ValidationError{std::string{what} + " must be an array"};
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        if (!j[i].is_number())
            throw ValidationError{std::string{what} + " must hold numbers"};
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Json from_vector(Vector const& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

inline double number(Json const& j, char const* key)
{
    if (!j.contains(key) || !j.at(key).is_number())
        throw ValidationError{std::string{"missing numeric field '"} + key
                              + "'"};
    return j.at(key).get<double>();
}

}  // namespace json_detail

inline Json rate_to_json(RateExpression const& rate)
{
    using json_detail::from_vector;
    return std::visit(
        [](auto const& r) -> Json {
            using T = std::decay_t<decltype(r)>;
            Json j;
            if constexpr (std::is_same_v<T, ConstantRate>)
            {
                j["kind"] = "constant";
                j["c"] = r.value;
            }
            else if constexpr (std::is_same_v<T, AffineRate>)
            {
                j["kind"] = "affine";
                j["c"] = r.offset;
                j["a"] = from_vector(r.slope);
            }
            else
            {
                j["kind"] = "sigmoid";
                j["c0"] = r.c0;
                j["c1"] = r.c1;
                j["a"] = from_vector(r.a);
                j["b"] = r.b;
            }
            return j;
        },
        rate.form());
}

inline RateExpression rate_from_json(Json const& j)
{
    using json_detail::number;
    using json_detail::to_vector;
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ValidationError{"rate expression needs a string 'kind'"};
    auto kind = j.at("kind").get<std::string>();
    if (kind == "constant")
        return ConstantRate{number(j, "c")};
    if (kind == "affine")
    {
        if (!j.contains("a"))
            throw ValidationError{"affine rate needs 'a'"};
        return AffineRate{number(j, "c"), to_vector(j.at("a"), "a")};
    }
    if (kind == "sigmoid")
    {
        if (!j.contains("a"))
            throw ValidationError{"sigmoid rate needs 'a'"};
        return SigmoidRate{number(j, "c0"), number(j, "c1"),
                           to_vector(j.at("a"), "a"), number(j, "b")};
    }
    throw ValidationError{"unknown rate kind '" + kind + "'"};
}

inline Json kernel_to_json(JumpKernel const& kernel)
{
    Json j;
    j["dim"] = kernel.dim();
    j["rate_bound"] = kernel.rate_bound();
    Json atoms = Json::array();
    for (auto const& atom : kernel.atoms())
    {
        Json a;
        a["z"] = json_detail::from_vector(atom.displacement);
        a["rate"] = rate_to_json(atom.rate);
        atoms.push_back(std::move(a));
    }
    j["atoms"] = std::move(atoms);
    return j;
}

inline JumpKernel kernel_from_json(Json const& j)
{
    if (!j.is_object())
        throw ValidationError{"kernel definition must be an object"};
    if (!j.contains("dim") || !j.at("dim").is_number_integer())
        throw ValidationError{"kernel needs integer 'dim'"};
    if (!j.contains("atoms") || !j.at("atoms").is_array())
        throw ValidationError{"kernel needs an 'atoms' array"};
    std::vector<JumpAtom> atoms;
    for (auto const& a : j.at("atoms"))
    {
        if (!a.contains("z") || !a.contains("rate"))
            throw ValidationError{"atom needs 'z' and 'rate'"};
        atoms.push_back({json_detail::to_vector(a.at("z"), "z"),
                         rate_from_json(a.at("rate"))});
    }
    return JumpKernel{j.at("dim").get<int>(), std::move(atoms),
                      json_detail::number(j, "rate_bound")};
}

//! Canonical text form: two-space indent, trailing newline.
inline std::string dump_json(Json const& j)
{
    return j.dump(2) + "\n";
}

inline Json parse_json_text(std::string const& text)
{
    try
    {
        return Json::parse(text);
    }
    catch (Json::parse_error const& e)
    {
        throw ValidationError{std::string{"malformed JSON: "} + e.what()};
    }
}

inline std::string read_text_file(std::string const& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw IoError{"cannot open '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(std::string const& path, std::string const& text)
{
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out)
        throw IoError{"cannot write '" + path + "'"};
    out << text;
    if (!out)
        throw IoError{"write failed for '" + path + "'"};
}

inline JumpKernel load_kernel(std::string const& path)
{
    return kernel_from_json(parse_json_text(read_text_file(path)));
}

inline std::string serialize_kernel(JumpKernel const& kernel)
{
    return dump_json(kernel_to_json(kernel));
}

}  // namespace wflab
