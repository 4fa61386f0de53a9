#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "svmpso/dataset.hpp"
#include "svmpso/svm.hpp"

namespace svmpso {

inline constexpr const char* kModelFormatTag = "svmpso-model";
inline constexpr int kModelFormatVersion = 1;

/// Versioned text format: key-value header followed by one line per support
/// vector (`index label lambda f1 .. fq`). Doubles use shortest-roundtrip
/// formatting, so save/load is exact. `scaling` optionally records the
/// min/max bounds the training features were normalized with, letting
/// `predict` accept raw inputs.
inline void save_model(const SvmModel& model, std::ostream& out,
                       const FeatureScaling* scaling = nullptr) {
    out << kModelFormatTag << " v" << kModelFormatVersion << '\n';
    out << "kernel " << kernel_name(model.kernel.kind) << '\n';
    switch (model.kernel.kind) {
    case KernelKind::polynomial:
        out << "degree " << model.kernel.degree << '\n';
        break;
    case KernelKind::rbf:
        out << "sigma " << format_double(model.kernel.sigma) << '\n';
        break;
    case KernelKind::sigmoid:
        out << "k1 " << format_double(model.kernel.k1) << '\n';
        out << "k2 " << format_double(model.kernel.k2) << '\n';
        break;
    case KernelKind::linear:
        break;
    }
    out << "c " << format_double(model.c) << '\n';
    out << "bias " << format_double(model.bias) << '\n';
    out << "converged " << (model.diag.converged ? 1 : 0) << '\n';
    out << "dim " << model.dim() << '\n';
    if (scaling) {
        if (scaling->dim() != model.dim())
            throw std::invalid_argument("save_model: scaling dimension mismatch");
        out << "scaling " << scaling->dim() << '\n';
        for (std::size_t l = 0; l < scaling->dim(); ++l)
            out << format_double(scaling->lo[l]) << ' ' << format_double(scaling->hi[l]) << '\n';
    }
    out << "supports " << model.support_count() << '\n';
    for (std::size_t i = 0; i < model.support_count(); ++i) {
        out << model.support_indices[i] << ' ' << model.support_labels[i] << ' '
            << format_double(model.alphas[i]);
        for (double v : model.support_vectors.row(i))
            out << ' ' << format_double(v);
        out << '\n';
    }
}

inline SvmModel load_model(std::istream& in, FeatureScaling* scaling = nullptr) {
    auto fail = [](const std::string& why) -> SvmModel {
        throw DataError("model file: " + why);
    };
    if (scaling)
        *scaling = FeatureScaling{};

    std::string tag, version;
    if (!(in >> tag >> version) || tag != kModelFormatTag)
        fail("not a model file");
    if (version != "v" + std::to_string(kModelFormatVersion))
        fail("unsupported version " + version);

    SvmModel model;
    std::string key;
    std::size_t dim = 0, supports = 0;
    bool have_counts = false;
    while (!have_counts && in >> key) {
        if (key == "kernel") {
            std::string name;
            in >> name;
            if (name == "linear")
                model.kernel.kind = KernelKind::linear;
            else if (name == "polynomial")
                model.kernel.kind = KernelKind::polynomial;
            else if (name == "rbf")
                model.kernel.kind = KernelKind::rbf;
            else if (name == "sigmoid")
                model.kernel.kind = KernelKind::sigmoid;
            else
                fail("unknown kernel '" + name + "'");
        } else if (key == "degree") {
            in >> model.kernel.degree;
        } else if (key == "sigma") {
            in >> model.kernel.sigma;
        } else if (key == "k1") {
            in >> model.kernel.k1;
        } else if (key == "k2") {
            in >> model.kernel.k2;
        } else if (key == "c") {
            in >> model.c;
        } else if (key == "bias") {
            in >> model.bias;
        } else if (key == "converged") {
            int v = 1;
            in >> v;
            model.diag.converged = v != 0;
        } else if (key == "dim") {
            in >> dim;
        } else if (key == "scaling") {
            std::size_t q = 0;
            in >> q;
            FeatureScaling s;
            s.lo.resize(q);
            s.hi.resize(q);
            for (std::size_t l = 0; l < q && in; ++l)
                in >> s.lo[l] >> s.hi[l];
            if (scaling)
                *scaling = std::move(s);
        } else if (key == "supports") {
            in >> supports;
            have_counts = true;
        } else {
            fail("unknown header key '" + key + "'");
        }
        if (!in)
            fail("truncated header");
    }
    if (!have_counts)
        fail("missing supports count");

    model.support_vectors = Matrix(supports, dim);
    model.support_indices.resize(supports);
    model.support_labels.resize(supports);
    model.alphas.resize(supports);
    for (std::size_t i = 0; i < supports; ++i) {
        if (!(in >> model.support_indices[i] >> model.support_labels[i] >> model.alphas[i]))
            fail("truncated support vector table at row " + std::to_string(i));
        for (std::size_t l = 0; l < dim; ++l)
            if (!(in >> model.support_vectors(i, l)))
                fail("truncated support vector table at row " + std::to_string(i));
    }
    model.kernel.validate();
    return model;
}

inline void save_model_file(const SvmModel& model, const std::string& path,
                            const FeatureScaling* scaling = nullptr) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write model file: " + path);
    save_model(model, out, scaling);
    if (!out)
        throw DataError("failed writing model file: " + path);
}

inline SvmModel load_model_file(const std::string& path, FeatureScaling* scaling = nullptr) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open model file: " + path);
    return load_model(in, scaling);
}

}  // namespace svmpso
