#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "depwise/model.hpp"
#include "depwise/props.hpp"
#include "depwise/taskgen.hpp"

namespace py = pybind11;
using namespace depwise;

namespace {

py::dict instance_to_dict(const StoryInstance& inst) {
    py::dict d;
    py::list triples;
    for (const auto& t : inst.triples) {
        triples.append(py::make_tuple(t.src, std::string(to_string(t.label)), t.dst));
    }
    d["triples"] = triples;
    d["sentences"] = inst.sentences;
    d["question"] = py::make_tuple(inst.question.first, inst.question.second);
    d["gold"] = std::string(to_string(inst.gold));
    d["k"] = inst.k;
    d["noise"] = std::string(to_string(inst.noise));
    d["seed"] = inst.seed;
    return d;
}

RelationLabel label_arg(const std::string& s) {
    auto label = label_from_string(s);
    if (!label) throw ArgumentError("unknown relation label: " + s);
    return *label;
}

StoryInstance instance_from_dict(const py::dict& d) {
    StoryInstance inst;
    for (const auto& item : d["triples"]) {
        auto t = item.cast<py::tuple>();
        inst.triples.push_back({t[0].cast<std::string>(),
                                label_arg(t[1].cast<std::string>()),
                                t[2].cast<std::string>()});
    }
    if (d.contains("sentences")) {
        inst.sentences = d["sentences"].cast<std::vector<std::string>>();
    }
    auto q = d["question"].cast<py::tuple>();
    inst.question = {q[0].cast<std::string>(), q[1].cast<std::string>()};
    if (d.contains("gold")) inst.gold = label_arg(d["gold"].cast<std::string>());
    if (d.contains("k")) inst.k = d["k"].cast<int>();
    if (d.contains("noise")) {
        auto kind = noise_from_string(d["noise"].cast<std::string>());
        if (!kind) throw ArgumentError("unknown noise kind");
        inst.noise = *kind;
    }
    if (d.contains("seed")) inst.seed = d["seed"].cast<std::uint64_t>();
    return inst;
}

}  // namespace

PYBIND11_MODULE(_depwise, m) {
    m.doc() = "depth-wise graph reasoning core";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "StoryParseError", PyExc_ValueError);
    py::register_exception<ConflictError>(m, "ConflictError", PyExc_ValueError);

    m.def("labels", [] {
        std::vector<std::string> names;
        for (auto label : all_labels()) names.emplace_back(to_string(label));
        return names;
    });

    m.def(
        "generate",
        [](std::uint64_t seed, int k, const std::string& noise, int n) {
            auto kind = noise_from_string(noise);
            if (!kind) throw ArgumentError("unknown noise kind: " + noise);
            py::list out;
            for (const auto& inst : generate(seed, k, *kind, n)) {
                out.append(instance_to_dict(inst));
            }
            return out;
        },
        py::arg("seed"), py::arg("k"), py::arg("noise") = "none", py::arg("n") = 1);

    m.def(
        "render", [](const py::dict& d) { return render(instance_from_dict(d)); },
        py::arg("instance"));

    m.def(
        "parse",
        [](const std::string& text) {
            ParsedStory story = parse(text);
            py::dict d;
            py::list triples;
            for (const auto& t : story.triples) {
                triples.append(
                    py::make_tuple(t.src, std::string(to_string(t.label)), t.dst));
            }
            d["triples"] = triples;
            d["question"] = py::make_tuple(story.question.first, story.question.second);
            return d;
        },
        py::arg("text"));

    m.def(
        "compose",
        [](const std::vector<std::string>& chain) {
            std::vector<RelationLabel> labels;
            labels.reserve(chain.size());
            for (const auto& s : chain) labels.push_back(label_arg(s));
            return std::string(to_string(oracle_compose(labels)));
        },
        py::arg("chain"));

    m.def(
        "predict_exact",
        [](const py::dict& d) {
            return std::string(to_string(predict_exact(instance_from_dict(d))));
        },
        py::arg("instance"));

    m.def(
        "trace",
        [](const py::dict& d) {
            ExactTrace t = exact_trace(instance_from_dict(d));
            py::dict out;
            out["has_path"] = t.has_path;
            out["path"] = t.path;
            py::list hops;
            for (const auto& o : t.hop_offsets) hops.append(py::make_tuple(o.dx, o.dy));
            out["hop_offsets"] = hops;
            out["composed"] = py::make_tuple(t.composed.dx, t.composed.dy);
            out["filler_norm"] = t.filler_norm;
            out["predicted"] = std::string(to_string(t.predicted));
            return out;
        },
        py::arg("instance"));

    m.def(
        "run_props",
        [](const std::string& suite) {
            py::list out;
            for (const auto& r : run_prop_suite(suite)) {
                py::dict d;
                d["name"] = r.name;
                d["pass"] = r.pass;
                d["millis"] = r.millis;
                d["detail"] = r.detail;
                out.append(d);
            }
            return out;
        },
        py::arg("suite") = "all");
}
