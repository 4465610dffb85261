// povmkit command-line front end: analyze observable files, build minimal
// Naimark dilations, relate pairs of observables, and reproduce the built-in
// demo pair. Text output is for humans; --format machine emits one stable
// JSON document.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "povmkit/dilation.hpp"
#include "povmkit/funcrel.hpp"
#include "povmkit/io.hpp"
#include "povmkit/linalg.hpp"
#include "povmkit/observable.hpp"

using nlohmann::json;
using namespace povm;

namespace {

struct Options {
    Tolerance tol;
    std::size_t max_outcomes = kDefaultOutcomeCap;
    std::uint64_t budget = kDefaultSearchBudget;
    bool machine = false;
};

const char* yesno(bool b) { return b ? "yes" : "no"; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string subset_str(SubsetMask mask, const DiscreteObservable& obs) {
    return subset_to_string(mask, obs.outcomes);
}

json classification_json(const Classification& c, const DiscreteObservable& obs,
                         const RangeIndex* range) {
    json j;
    j["valid"] = c.validation.valid();
    j["issues"] = c.validation.issues;
    j["normalization_defect"] = c.validation.normalization_defect;
    if (!c.validation.valid()) return j;
    j["projection_valued"] = c.projection_valued;
    j["range_size"] = c.range_size;
    j["regular"] = c.regularity.regular;
    j["regular_witness"] =
        c.regularity.witness ? json(subset_str(*c.regularity.witness, obs)) : json();
    j["delta_closed"] = c.delta.closed;
    if (c.delta.witness && range) {
        j["delta_witness"] = {subset_str(range->representative_subset(c.delta.witness->a), obs),
                              subset_str(range->representative_subset(c.delta.witness->b), obs),
                              subset_str(range->representative_subset(c.delta.witness->c), obs)};
    } else {
        j["delta_witness"] = json();
    }
    j["range_boolean"] = c.range_boolean.boolean;
    if (c.range_boolean.boolean) {
        json atoms = json::array();
        if (range)
            for (std::size_t id : c.range_boolean.atoms)
                atoms.push_back(subset_str(range->representative_subset(id), obs));
        j["range_atoms"] = std::move(atoms);
        j["failed_law"] = json();
    } else {
        j["range_atoms"] = json();
        j["failed_law"] = c.range_boolean.failed_law;
    }
    return j;
}

void print_classification_text(std::ostream& out, const Classification& c,
                               const DiscreteObservable& obs, const RangeIndex* range,
                               const std::string& indent) {
    out << indent << "valid POVM: " << yesno(c.validation.valid()) << "\n";
    if (!c.validation.valid()) {
        for (const auto& issue : c.validation.issues) out << indent << "  - " << issue << "\n";
        return;
    }
    out << indent << "projection-valued: " << yesno(c.projection_valued) << "\n";
    out << indent << "range size: " << c.range_size << "\n";
    out << indent << "regular: " << yesno(c.regularity.regular);
    if (c.regularity.witness) out << " (witness " << subset_str(*c.regularity.witness, obs) << ")";
    out << "\n";
    out << indent << "delta-closed (diagnostic): " << yesno(c.delta.closed);
    if (c.delta.witness && range)
        out << " (witness " << subset_str(range->representative_subset(c.delta.witness->a), obs)
            << ", " << subset_str(range->representative_subset(c.delta.witness->b), obs) << ", "
            << subset_str(range->representative_subset(c.delta.witness->c), obs) << ")";
    out << "\n";
    out << indent << "range Boolean: " << yesno(c.range_boolean.boolean);
    if (c.range_boolean.boolean) {
        out << " (atoms: " << c.range_boolean.atoms.size() << ")";
    } else {
        out << " (" << c.range_boolean.failed_law << ")";
    }
    out << "\n";
}

json dilation_json(const Dilation& dil, const DilationReport& rep,
                   const DiscreteObservable& obs) {
    json j;
    j["dim_h"] = dil.dim_h;
    j["dim_k"] = dil.dim_k;
    json blocks = json::array();
    for (std::size_t i = 0; i < dil.blocks.size(); ++i)
        blocks.push_back({{"outcome", obs.outcomes[i]},
                          {"offset", dil.blocks[i].offset},
                          {"width", dil.blocks[i].width}});
    j["blocks"] = std::move(blocks);
    j["isometry_defect"] = rep.isometry_defect;
    j["atom_orthogonality_defect"] = rep.atom_orthogonality;
    j["completeness_defect"] = rep.completeness_defect;
    j["max_compression_defect"] = rep.max_compression_defect;
    j["minimality_rank"] = rep.minimality_rank;
    j["minimal"] = rep.minimal;
    return j;
}

void print_dilation_text(std::ostream& out, const Dilation& dil, const DilationReport& rep,
                         const DiscreteObservable& obs) {
    out << "dilation: dim H = " << dil.dim_h << ", dim K = " << dil.dim_k << "\n";
    for (std::size_t i = 0; i < dil.blocks.size(); ++i)
        out << "  block " << obs.outcomes[i] << ": offset " << dil.blocks[i].offset << ", width "
            << dil.blocks[i].width << "\n";
    out << "  isometry defect: " << fmt(rep.isometry_defect) << "\n";
    out << "  atom orthogonality defect: " << fmt(rep.atom_orthogonality) << "\n";
    out << "  completeness defect: " << fmt(rep.completeness_defect) << "\n";
    out << "  max compression defect: " << fmt(rep.max_compression_defect) << "\n";
    out << "  minimal: " << yesno(rep.minimal) << " (rank " << rep.minimality_rank << ")\n";
}

int finish(const Options& opt, const json& machine_doc, const std::string& text) {
    if (opt.machine)
        std::cout << machine_doc.dump(2) << "\n";
    else
        std::cout << text;
    return 0;
}

int cmd_analyze(const std::string& path, const Options& opt) {
    const DiscreteObservable obs = read_observable_file(path);
    const Classification c = classify(obs, opt.tol, opt.max_outcomes);
    std::optional<RangeIndex> range;
    if (c.validation.valid()) range.emplace(enumerate_range(obs, opt.tol, opt.max_outcomes));

    json doc;
    doc["command"] = "analyze";
    doc["input"] = path;
    doc["dim"] = obs.space_dim;
    doc["outcomes"] = obs.outcomes;
    doc["classification"] = classification_json(c, obs, range ? &*range : nullptr);

    std::ostringstream text;
    text << "observable " << path << ": dim " << obs.space_dim << ", " << obs.n_outcomes()
         << " outcomes\n";
    print_classification_text(text, c, obs, range ? &*range : nullptr, "");

    const int rc = finish(opt, doc, text.str());
    return c.validation.valid() ? rc : 2;
}

int cmd_dilate(const std::string& path, const Options& opt) {
    const DiscreteObservable obs = read_observable_file(path);
    const ValidationReport val = validate(obs, opt.tol);
    if (!val.valid()) {
        for (const auto& issue : val.issues) std::cerr << "invalid POVM: " << issue << "\n";
        return 2;
    }
    const Dilation dil = minimal_naimark(obs, opt.tol);
    const DilationReport rep = verify_dilation(dil, obs, opt.tol);

    json doc;
    doc["command"] = "dilate";
    doc["input"] = path;
    doc["dilation"] = dilation_json(dil, rep, obs);

    std::ostringstream text;
    text << "observable " << path << ": dim " << obs.space_dim << ", " << obs.n_outcomes()
         << " outcomes\n";
    print_dilation_text(text, dil, rep, obs);
    return finish(opt, doc, text.str());
}

int relate_pair(const DiscreteObservable& e, const DiscreteObservable& e1,
                const std::string& e_name, const std::string& e1_name, const Options& opt,
                const char* command) {
    for (const auto* pair : {&e, &e1}) {
        const ValidationReport val = validate(*pair, opt.tol);
        if (!val.valid()) {
            for (const auto& issue : val.issues)
                std::cerr << "invalid POVM (" << (pair == &e ? e_name : e1_name) << "): " << issue
                          << "\n";
            return 2;
        }
    }
    RelateOptions ropts;
    ropts.outcome_cap = opt.max_outcomes;
    ropts.budget = opt.budget;
    const RelationReport rep = relate(e, e1, opt.tol, ropts);
    const RangeIndex e_range = enumerate_range(e, opt.tol, opt.max_outcomes);
    const RangeIndex e1_range = enumerate_range(e1, opt.tol, opt.max_outcomes);

    json doc;
    doc["command"] = command;
    doc["e"] = {{"input", e_name},
                {"dim", e.space_dim},
                {"outcomes", e.outcomes},
                {"classification", classification_json(rep.e_class, e, &e_range)}};
    doc["e1"] = {{"input", e1_name},
                 {"dim", e1.space_dim},
                 {"outcomes", e1.outcomes},
                 {"classification", classification_json(rep.e1_class, e1, &e1_range)}};

    json coarse;
    coarse["holds"] = rep.coarse.coarse_graining;
    if (rep.coarse.coarse_graining) {
        json table = json::array();
        for (const auto& [y, x] : rep.coarse.table)
            table.push_back({{"target", subset_str(y, e1)}, {"subset", subset_str(x, e)}});
        coarse["table"] = std::move(table);
        coarse["unmatched"] = json();
    } else {
        coarse["table"] = json();
        coarse["unmatched"] = rep.coarse.unmatched ? json(subset_str(*rep.coarse.unmatched, e1))
                                                   : json();
    }
    doc["coarse_graining"] = std::move(coarse);

    json fn;
    fn["nodes"] = rep.function.nodes;
    switch (rep.function.outcome) {
        case SearchOutcome::Found: {
            fn["outcome"] = "found";
            json map = json::object();
            for (std::size_t x = 0; x < e.n_outcomes(); ++x)
                map[e.outcomes[x]] = e1.outcomes[rep.function.function->table[x]];
            fn["map"] = std::move(map);
            break;
        }
        case SearchOutcome::None:
            fn["outcome"] = "none";
            fn["map"] = json();
            break;
        case SearchOutcome::Inconclusive:
            fn["outcome"] = "inconclusive";
            fn["map"] = json();
            break;
    }
    doc["function"] = std::move(fn);
    doc["dilation"] = dilation_json(rep.dilation, rep.dilation_report, e);

    json r1;
    r1["subset_count"] = std::size_t{1} << rep.r1.n_outcomes;
    r1["member_count"] = rep.r1.members.size();
    json members = json::array(), targets = json::array();
    for (std::size_t k = 0; k < rep.r1.members.size(); ++k) {
        members.push_back(subset_str(rep.r1.members[k], e));
        targets.push_back(subset_str(rep.r1.targets[k], e1));
    }
    r1["members"] = std::move(members);
    r1["targets"] = std::move(targets);
    r1["boolean"] = rep.r1_boolean.boolean;
    if (!rep.r1_boolean.boolean && rep.r1_boolean.witness) {
        r1["failed_op"] = rep.r1_boolean.failed_op;
        r1["witness"] = {subset_str(rep.r1_boolean.witness->first, e),
                         subset_str(rep.r1_boolean.witness->second, e)};
    } else {
        r1["failed_op"] = json();
        r1["witness"] = json();
    }
    doc["r1"] = std::move(r1);

    json vprop;
    vprop["holds"] = rep.etilde_v_property.holds;
    vprop["witness"] = json();
    if (rep.etilde_v_property.witness)
        vprop["witness"] = {{"x", subset_str(rep.etilde_v_property.witness->x, e)},
                            {"y", subset_str(rep.etilde_v_property.witness->y, e)},
                            {"q_index", rep.etilde_v_property.witness->q_index}};
    doc["v_property_etilde_on_r1"] = std::move(vprop);

    if (rep.functional_form) {
        json form;
        form["labels"] = rep.functional_form->labels;
        json ftab = json::array();
        for (const auto& [from, to] : rep.functional_form->f_table)
            ftab.push_back({from, to});
        form["f"] = std::move(ftab);
        doc["functional_form"] = std::move(form);
    } else {
        doc["functional_form"] = json();
    }

    if (rep.coexistence) {
        json co;
        co["points"] = rep.coexistence->common.n_outcomes();
        co["weight"] = rep.coexistence->common.effects[0](0, 0).real();
        co["g"] = rep.coexistence->to_e.table;
        co["f"] = rep.coexistence->to_e1.table;
        doc["coexistence"] = std::move(co);
    } else {
        doc["coexistence"] = json();
        doc["coexistence_note"] = rep.coexistence_note;
    }

    std::ostringstream text;
    text << "relation report: E = " << e_name << ", E1 = " << e1_name << "\n";
    text << "E:\n";
    print_classification_text(text, rep.e_class, e, &e_range, "  ");
    text << "E1:\n";
    print_classification_text(text, rep.e1_class, e1, &e1_range, "  ");
    text << "coarse graining: " << yesno(rep.coarse.coarse_graining);
    if (!rep.coarse.coarse_graining && rep.coarse.unmatched)
        text << " (unmatched " << subset_str(*rep.coarse.unmatched, e1) << ")";
    text << "\n";
    switch (rep.function.outcome) {
        case SearchOutcome::Found: {
            text << "function: found {";
            for (std::size_t x = 0; x < e.n_outcomes(); ++x)
                text << (x ? ", " : "") << e.outcomes[x] << " -> "
                     << e1.outcomes[rep.function.function->table[x]];
            text << "}\n";
            break;
        }
        case SearchOutcome::None:
            text << "function: none (search exhausted, " << rep.function.nodes << " nodes)\n";
            break;
        case SearchOutcome::Inconclusive:
            text << "function: inconclusive (budget of " << opt.budget << " nodes hit)\n";
            break;
    }
    print_dilation_text(text, rep.dilation, rep.dilation_report, e);
    text << "R1: " << rep.r1.members.size() << " members of "
         << (std::size_t{1} << rep.r1.n_outcomes) << " subsets\n";
    text << "R1 Boolean: " << yesno(rep.r1_boolean.boolean);
    if (!rep.r1_boolean.boolean && rep.r1_boolean.witness)
        text << " (" << rep.r1_boolean.failed_op << " witness "
             << subset_str(rep.r1_boolean.witness->first, e) << ", "
             << subset_str(rep.r1_boolean.witness->second, e) << ")";
    text << "\n";
    text << "V-property of Etilde on R1: " << (rep.etilde_v_property.holds ? "holds" : "fails")
         << "\n";
    if (rep.functional_form) {
        text << "functional form: f = {";
        for (std::size_t k = 0; k < rep.functional_form->f_table.size(); ++k)
            text << (k ? ", " : "") << rep.functional_form->f_table[k].first << " -> "
                 << rep.functional_form->f_table[k].second;
        text << "}\n";
    }
    if (rep.coexistence) {
        text << "coexistent via uniform F on " << rep.coexistence->common.n_outcomes()
             << " points\n";
    } else if (!rep.coexistence_note.empty()) {
        text << "coexistence witness: not constructed (" << rep.coexistence_note << ")\n";
    }

    const int rc = finish(opt, doc, text.str());
    if (rc != 0) return rc;
    return rep.function.outcome == SearchOutcome::Inconclusive ? 4 : 0;
}

int cmd_relate(const std::string& e_path, const std::string& e1_path, const Options& opt) {
    return relate_pair(read_observable_file(e_path), read_observable_file(e1_path), e_path,
                       e1_path, opt, "relate");
}

int cmd_demo(const std::string& name, const Options& opt) {
    if (name != "remark1") throw ParseError("unknown demo '" + name + "' (try: remark1)");
    const auto e = DiscreteObservable::scalar_measure({1. / 8, 1. / 8, 3. / 8, 3. / 8},
                                                      {"x1", "x2", "x3", "x4"});
    const auto e1 = DiscreteObservable::scalar_measure({1. / 8, 1. / 8, 1. / 8, 5. / 8},
                                                       {"y1", "y2", "y3", "y4"});
    if (!opt.machine) {
        std::cout << "demo remark1: scalar measures E = (1/8, 1/8, 3/8, 3/8) on {x1..x4}, "
                     "E1 = (1/8, 1/8, 1/8, 5/8) on {y1..y4}\n";
    }
    return relate_pair(e, e1, "remark1:E", "remark1:E1", opt, "demo");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"povmkit: discrete POVMs, Naimark dilations, coarse grainings and "
                 "functions of observables"};
    app.require_subcommand(1);

    Options opt;
    double tolerance_eq = opt.tol.eq;
    std::string format = "text";
    app.add_option("--tolerance", tolerance_eq,
                   "equality tolerance; psd/rank thresholds scale proportionally");
    app.add_option("--max-outcomes", opt.max_outcomes, "cap on outcome counts (default 16)");
    app.add_option("--budget", opt.budget, "node budget for the function search");
    app.add_option("--format", format, "output format: text | machine")
        ->check(CLI::IsMember({"text", "machine"}));

    std::string analyze_file, dilate_file, relate_e, relate_e1, demo_name;
    CLI::App* analyze = app.add_subcommand("analyze", "validate and classify an observable");
    analyze->add_option("file", analyze_file, "observable JSON file")->required();
    CLI::App* dilate = app.add_subcommand("dilate", "build the minimal Naimark dilation");
    dilate->add_option("file", dilate_file, "observable JSON file")->required();
    CLI::App* relate_cmd = app.add_subcommand("relate", "relate two observables");
    relate_cmd->add_option("fileE", relate_e, "the finer observable E")->required();
    relate_cmd->add_option("fileE1", relate_e1, "the candidate coarse graining E1")->required();
    CLI::App* demo = app.add_subcommand("demo", "run a built-in demonstration");
    demo->add_option("name", demo_name, "demo name (remark1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    opt.tol = Tolerance::from_eq(tolerance_eq);
    opt.machine = format == "machine";

    try {
        if (*analyze) return cmd_analyze(analyze_file, opt);
        if (*dilate) return cmd_dilate(dilate_file, opt);
        if (*relate_cmd) return cmd_relate(relate_e, relate_e1, opt);
        if (*demo) return cmd_demo(demo_name, opt);
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const InputError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const SearchInconclusive& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 4;
    } catch (const NumericError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 1;
}
