#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigma/core.hpp"

namespace sigma {

// Line-oriented model description. Grammar (one item per line, `#` starts a comment):
//
//   name: <word>
//   carrier: <n> | <name> <name> ...
//   group:                      followed by n rows of n element names
//   mul:                        followed by n rows of n element names
//   one: <element>
//   traits: [reindex-invariant] [zero-drop] [empty=<element>] [no-ordinal]
//   declared: <axiom-id> ...
//   sigma:                      followed by rows, one per summable family:
//     ()            -> <sum>
//     <labels> | <elements> -> <sum>       labels: 0 3 w w+2 w2+1 ...
//     ord: [<prefix> | <cycle>] ... <final> -> <sum>
//     ms: <element>*<count|w> ... -> <sum>
//   opens: {}, {1}, {0,1}       topology literal, elements by name
//   A: {0}, {0,2}               set system literal
//
// Section headers start with a known key; every other line belongs to the
// section above it.
struct ModelFile {
    std::string name = "table";
    std::vector<std::string> names;
    std::vector<std::vector<Elem>> add;
    std::vector<std::vector<Elem>> mul;
    std::optional<Elem> one;
    Traits traits;
    bool traits_given = false;
    std::vector<AxiomId> declared;
    std::vector<std::pair<Family, Elem>> sigma;
    std::optional<std::vector<std::uint64_t>> opens;
    std::optional<std::vector<std::uint64_t>> set_system;

    Carrier carrier() const;
    // Table system; raises FunctionhoodConflict on conflicting rows.
    System system() const;

    bool operator==(const ModelFile&) const = default;
};

ModelFile parse_model(const std::string& text);
ModelFile load_model(const std::string& path);
std::string write_model(const ModelFile& m);

// Literal helpers shared with the command line.
std::vector<std::uint64_t> parse_set_list(const std::string& text, const Carrier& c);
std::string write_set_list(const std::vector<std::uint64_t>& sets, const Carrier& c);
Family parse_family(const std::string& text, const Carrier& c);
std::string write_family(const Family& f, const Carrier& c);

}  // namespace sigma
