#include "mpskit/onnx_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "onnx_subset.pb.h"

#include "mpskit/errors.hpp"

namespace mpskit {
namespace {

constexpr int kDataTypeFloat = 1;
constexpr int kDataTypeInt64 = 7;

struct TensorValue {
    std::vector<long long> shape;
    std::vector<float> floats;
    std::vector<long long> ints;
    bool is_int = false;

    std::size_t elements() const {
        std::size_t n = 1;
        for (long long d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
};

[[noreturn]] void fail(const std::string& who, const std::string& what) {
    throw BackendError(who + ": " + what);
}

TensorValue tensor_from_proto(const mpskit_onnx::TensorProto& t, const std::string& who) {
    TensorValue value;
    for (long long d : t.dims()) {
        if (d < 1) fail(who, "tensor '" + t.name() + "' has a non-positive dimension");
        value.shape.push_back(d);
    }
    const std::size_t n = value.elements();
    if (t.data_type() == kDataTypeFloat) {
        value.floats.resize(n);
        if (!t.raw_data().empty()) {
            if (t.raw_data().size() != n * 4) fail(who, "tensor '" + t.name() + "' raw size mismatch");
            std::memcpy(value.floats.data(), t.raw_data().data(), n * 4);
        } else {
            if (static_cast<std::size_t>(t.float_data_size()) != n) {
                fail(who, "tensor '" + t.name() + "' element count mismatch");
            }
            std::copy(t.float_data().begin(), t.float_data().end(), value.floats.begin());
        }
    } else if (t.data_type() == kDataTypeInt64) {
        value.is_int = true;
        value.ints.resize(n);
        if (!t.raw_data().empty()) {
            if (t.raw_data().size() != n * 8) fail(who, "tensor '" + t.name() + "' raw size mismatch");
            std::memcpy(value.ints.data(), t.raw_data().data(), n * 8);
        } else {
            if (static_cast<std::size_t>(t.int64_data_size()) != n) {
                fail(who, "tensor '" + t.name() + "' element count mismatch");
            }
            std::copy(t.int64_data().begin(), t.int64_data().end(), value.ints.begin());
        }
    } else {
        fail(who, "tensor '" + t.name() + "' has unsupported data type " +
                      std::to_string(t.data_type()));
    }
    return value;
}

const std::set<std::string> kSupportedOps = {
    "Gemm", "MatMul", "Add",      "Relu",    "Sigmoid",
    "Flatten", "Reshape", "Identity", "Softmax", "Constant",
};

const mpskit_onnx::AttributeProto* find_attribute(const mpskit_onnx::NodeProto& node,
                                                  const std::string& name) {
    for (const auto& attr : node.attribute()) {
        if (attr.name() == name) return &attr;
    }
    return nullptr;
}

float attr_float(const mpskit_onnx::NodeProto& node, const std::string& name, float fallback) {
    const auto* attr = find_attribute(node, name);
    return attr ? attr->f() : fallback;
}

long long attr_int(const mpskit_onnx::NodeProto& node, const std::string& name,
                   long long fallback) {
    const auto* attr = find_attribute(node, name);
    return attr ? attr->i() : fallback;
}

TensorValue add_broadcast(const TensorValue& a, const TensorValue& b, const std::string& who) {
    if (a.is_int || b.is_int) fail(who, "Add on integer tensors is unsupported");
    const std::size_t rank = std::max(a.shape.size(), b.shape.size());
    std::vector<long long> sa(rank, 1), sb(rank, 1), out_shape(rank, 1);
    std::copy(a.shape.begin(), a.shape.end(), sa.begin() + (rank - a.shape.size()));
    std::copy(b.shape.begin(), b.shape.end(), sb.begin() + (rank - b.shape.size()));
    for (std::size_t d = 0; d < rank; ++d) {
        if (sa[d] != sb[d] && sa[d] != 1 && sb[d] != 1) fail(who, "Add shapes not broadcastable");
        out_shape[d] = std::max(sa[d], sb[d]);
    }
    TensorValue out;
    out.shape = out_shape;
    out.floats.resize(out.elements());
    std::vector<long long> idx(rank, 0);
    for (std::size_t flat = 0; flat < out.floats.size(); ++flat) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t d = 0; d < rank; ++d) {
            ia = ia * static_cast<std::size_t>(sa[d]) +
                 static_cast<std::size_t>(sa[d] == 1 ? 0 : idx[d]);
            ib = ib * static_cast<std::size_t>(sb[d]) +
                 static_cast<std::size_t>(sb[d] == 1 ? 0 : idx[d]);
        }
        out.floats[flat] = a.floats[ia] + b.floats[ib];
        for (std::size_t d = rank; d-- > 0;) {
            if (++idx[d] < out_shape[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

// Rows x cols view of a 2D tensor; Gemm and MatMul operands must be 2D.
std::pair<long long, long long> as_2d(const TensorValue& t, const std::string& who,
                                      const std::string& role) {
    if (t.shape.size() != 2) fail(who, role + " operand is not 2-dimensional");
    return {t.shape[0], t.shape[1]};
}

class GraphExecutor {
public:
    GraphExecutor(mpskit_onnx::ModelProto model, std::string who)
        : model_(std::move(model)), who_(std::move(who)) {
        if (!model_.has_graph()) fail(who_, "model has no graph");
        const auto& graph = model_.graph();
        for (const auto& init : graph.initializer()) {
            initializers_[init.name()] = tensor_from_proto(init, who_);
        }
        for (const auto& node : graph.node()) {
            if (!node.domain().empty() && node.domain() != "ai.onnx") {
                fail(who_, "unsupported graph: operator domain '" + node.domain() + "'");
            }
            if (!kSupportedOps.contains(node.op_type())) {
                fail(who_, "unsupported graph: operator '" + node.op_type() + "'");
            }
        }
        for (const auto& input : graph.input()) {
            if (initializers_.contains(input.name())) continue;
            if (!input_name_.empty()) fail(who_, "graph has more than one data input");
            input_name_ = input.name();
            if (input.type().has_tensor_type() && input.type().tensor_type().has_shape()) {
                for (const auto& dim : input.type().tensor_type().shape().dim()) {
                    // Dynamic dims (named or non-positive) are run as 1.
                    input_shape_.push_back(dim.dim_value() > 0 ? dim.dim_value() : 1);
                }
            }
        }
        if (input_name_.empty()) fail(who_, "graph has no data input");
        if (graph.output_size() != 1) fail(who_, "graph must have exactly one output");
        output_name_ = graph.output(0).name();

        opset_ = 0;
        for (const auto& opset : model_.opset_import()) {
            if (opset.domain().empty() || opset.domain() == "ai.onnx") {
                opset_ = std::max<long long>(opset_, opset.version());
            }
        }
    }

    std::size_t input_elements_or(std::size_t fallback) const {
        if (input_shape_.empty()) return fallback;
        std::size_t n = 1;
        for (long long d : input_shape_) n *= static_cast<std::size_t>(d);
        return n;
    }

    const std::vector<long long>& input_shape() const { return input_shape_; }

    std::vector<float> run(TensorValue input) const {
        std::map<std::string, TensorValue> values = initializers_;
        values[input_name_] = std::move(input);
        for (const auto& node : model_.graph().node()) {
            apply_node(node, values);
        }
        const auto it = values.find(output_name_);
        if (it == values.end()) fail(who_, "graph never produced its output");
        if (it->second.is_int) fail(who_, "graph output is not a float tensor");
        return it->second.floats;
    }

private:
    const TensorValue& fetch(const std::map<std::string, TensorValue>& values,
                             const std::string& name) const {
        const auto it = values.find(name);
        if (it == values.end()) {
            fail(who_, "value '" + name + "' used before it is produced");
        }
        return it->second;
    }

    void apply_node(const mpskit_onnx::NodeProto& node,
                    std::map<std::string, TensorValue>& values) const {
        const std::string& op = node.op_type();
        TensorValue out;
        if (op == "Constant") {
            const auto* attr = find_attribute(node, "value");
            if (!attr || !attr->has_t()) fail(who_, "Constant node without a tensor value");
            out = tensor_from_proto(attr->t(), who_);
        } else if (op == "Identity") {
            out = fetch(values, node.input(0));
        } else if (op == "Relu") {
            out = fetch(values, node.input(0));
            for (float& v : out.floats) v = std::max(0.f, v);
        } else if (op == "Sigmoid") {
            out = fetch(values, node.input(0));
            for (float& v : out.floats) v = 1.f / (1.f + std::exp(-v));
        } else if (op == "Add") {
            out = add_broadcast(fetch(values, node.input(0)), fetch(values, node.input(1)), who_);
        } else if (op == "Flatten") {
            out = fetch(values, node.input(0));
            const long long axis = normalize_axis(attr_int(node, "axis", 1), out.shape.size());
            long long rows = 1, cols = 1;
            for (std::size_t d = 0; d < out.shape.size(); ++d) {
                (static_cast<long long>(d) < axis ? rows : cols) *= out.shape[d];
            }
            out.shape = {rows, cols};
        } else if (op == "Reshape") {
            out = fetch(values, node.input(0));
            const TensorValue& shape = fetch(values, node.input(1));
            if (!shape.is_int) fail(who_, "Reshape shape input is not an integer tensor");
            out.shape = resolve_reshape(out, shape.ints);
        } else if (op == "MatMul") {
            out = matmul(fetch(values, node.input(0)), fetch(values, node.input(1)));
        } else if (op == "Gemm") {
            out = gemm(node, values);
        } else if (op == "Softmax") {
            out = softmax(node, fetch(values, node.input(0)));
        } else {
            fail(who_, "unsupported graph: operator '" + op + "'");
        }
        if (node.output_size() < 1) fail(who_, "node without outputs");
        values[node.output(0)] = std::move(out);
    }

    long long normalize_axis(long long axis, std::size_t rank) const {
        if (axis < 0) axis += static_cast<long long>(rank);
        if (axis < 0 || axis > static_cast<long long>(rank)) fail(who_, "axis out of range");
        return axis;
    }

    std::vector<long long> resolve_reshape(const TensorValue& data,
                                           const std::vector<long long>& request) const {
        std::vector<long long> shape(request);
        long long known = 1;
        int infer = -1;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            if (shape[d] == 0) {
                if (d >= data.shape.size()) fail(who_, "Reshape copies a missing dimension");
                shape[d] = data.shape[d];
            }
            if (shape[d] == -1) {
                if (infer >= 0) fail(who_, "Reshape with two inferred dimensions");
                infer = static_cast<int>(d);
            } else {
                known *= shape[d];
            }
        }
        const long long total = static_cast<long long>(data.elements());
        if (infer >= 0) {
            if (known == 0 || total % known != 0) fail(who_, "Reshape cannot infer dimension");
            shape[static_cast<std::size_t>(infer)] = total / known;
        } else if (known != total) {
            fail(who_, "Reshape changes element count");
        }
        return shape;
    }

    TensorValue matmul(const TensorValue& a, const TensorValue& b) const {
        const auto [m, ka] = as_2d(a, who_, "MatMul");
        const auto [kb, n] = as_2d(b, who_, "MatMul");
        if (ka != kb) fail(who_, "MatMul inner dimensions differ");
        TensorValue out;
        out.shape = {m, n};
        out.floats.assign(static_cast<std::size_t>(m * n), 0.f);
        for (long long i = 0; i < m; ++i) {
            for (long long k = 0; k < ka; ++k) {
                const float aik = a.floats[static_cast<std::size_t>(i * ka + k)];
                if (aik == 0.f) continue;
                const float* brow = b.floats.data() + static_cast<std::size_t>(k * n);
                float* orow = out.floats.data() + static_cast<std::size_t>(i * n);
                for (long long j = 0; j < n; ++j) orow[j] += aik * brow[j];
            }
        }
        return out;
    }

    TensorValue gemm(const mpskit_onnx::NodeProto& node,
                     std::map<std::string, TensorValue>& values) const {
        const float alpha = attr_float(node, "alpha", 1.f);
        const float beta = attr_float(node, "beta", 1.f);
        const bool trans_a = attr_int(node, "transA", 0) != 0;
        const bool trans_b = attr_int(node, "transB", 0) != 0;
        const TensorValue& a = fetch(values, node.input(0));
        const TensorValue& b = fetch(values, node.input(1));
        const auto [a0, a1] = as_2d(a, who_, "Gemm");
        const auto [b0, b1] = as_2d(b, who_, "Gemm");
        const long long m = trans_a ? a1 : a0;
        const long long k = trans_a ? a0 : a1;
        const long long kb = trans_b ? b1 : b0;
        const long long n = trans_b ? b0 : b1;
        if (k != kb) fail(who_, "Gemm inner dimensions differ");

        TensorValue out;
        out.shape = {m, n};
        out.floats.assign(static_cast<std::size_t>(m * n), 0.f);
        for (long long i = 0; i < m; ++i) {
            for (long long j = 0; j < n; ++j) {
                double acc = 0.0;
                for (long long kk = 0; kk < k; ++kk) {
                    const float av = trans_a ? a.floats[static_cast<std::size_t>(kk * a1 + i)]
                                             : a.floats[static_cast<std::size_t>(i * a1 + kk)];
                    const float bv = trans_b ? b.floats[static_cast<std::size_t>(j * b1 + kk)]
                                             : b.floats[static_cast<std::size_t>(kk * b1 + j)];
                    acc += static_cast<double>(av) * bv;
                }
                out.floats[static_cast<std::size_t>(i * n + j)] = alpha * static_cast<float>(acc);
            }
        }
        if (node.input_size() > 2 && !node.input(2).empty() && beta != 0.f) {
            TensorValue bias = fetch(values, node.input(2));
            for (float& v : bias.floats) v *= beta;
            out = add_broadcast(out, bias, who_);
        }
        return out;
    }

    TensorValue softmax(const mpskit_onnx::NodeProto& node, const TensorValue& in) const {
        TensorValue out = in;
        const long long fallback = opset_ >= 13 ? -1 : 1;
        const long long axis = normalize_axis(attr_int(node, "axis", fallback), in.shape.size());
        if (axis == static_cast<long long>(in.shape.size())) fail(who_, "Softmax axis out of range");
        std::size_t inner = 1, axis_n = static_cast<std::size_t>(in.shape[static_cast<std::size_t>(axis)]);
        for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < in.shape.size(); ++d) {
            inner *= static_cast<std::size_t>(in.shape[d]);
        }
        const std::size_t outer = in.elements() / (inner * axis_n);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t base = o * axis_n * inner + i;
                float peak = out.floats[base];
                for (std::size_t a = 1; a < axis_n; ++a) {
                    peak = std::max(peak, out.floats[base + a * inner]);
                }
                double total = 0.0;
                for (std::size_t a = 0; a < axis_n; ++a) {
                    const float e = std::exp(out.floats[base + a * inner] - peak);
                    out.floats[base + a * inner] = e;
                    total += e;
                }
                for (std::size_t a = 0; a < axis_n; ++a) {
                    out.floats[base + a * inner] = static_cast<float>(out.floats[base + a * inner] / total);
                }
            }
        }
        return out;
    }

    mpskit_onnx::ModelProto model_;
    std::string who_;
    std::map<std::string, TensorValue> initializers_;
    std::string input_name_;
    std::vector<long long> input_shape_;
    std::string output_name_;
    long long opset_ = 0;
};

class ExternalOracle : public Oracle {
public:
    ExternalOracle(ModelManifest manifest, GraphExecutor executor)
        : manifest_(std::move(manifest)), executor_(std::move(executor)) {
        const std::size_t expected = static_cast<std::size_t>(manifest_.input_height) *
                                     static_cast<std::size_t>(manifest_.input_width) *
                                     manifest_.channel_means.size();
        if (executor_.input_elements_or(expected) != expected) {
            fail(who(), "graph input size does not match manifest dimensions");
        }
    }

    const std::string& model_id() const override { return manifest_.model_id; }
    const std::string& architecture_tag() const override { return manifest_.architecture_tag; }
    int input_height() const override { return manifest_.input_height; }
    int input_width() const override { return manifest_.input_width; }
    int input_channels() const override { return static_cast<int>(manifest_.channel_means.size()); }
    int class_count() const override { return manifest_.class_count; }

    ImageTensor preprocess(const ImageTensor& raw) const override {
        ImageTensor image = raw;
        if (image.channels == 1 && input_channels() == 3) image = replicate_channels(image);
        if (image.channels != input_channels()) {
            throw DataError(who() + ": image has " + std::to_string(raw.channels) +
                            " channels, model expects " + std::to_string(input_channels()));
        }
        const int th = manifest_.input_height;
        const int tw = manifest_.input_width;
        if (manifest_.resize_strategy == ResizeStrategy::stretch) {
            if (image.height != th || image.width != tw) image = resize_bilinear(image, th, tw);
        } else {
            const double scale = std::max(static_cast<double>(th) / image.height,
                                          static_cast<double>(tw) / image.width);
            const int rh = std::max(th, static_cast<int>(std::llround(image.height * scale)));
            const int rw = std::max(tw, static_cast<int>(std::llround(image.width * scale)));
            if (image.height != rh || image.width != rw) image = resize_bilinear(image, rh, rw);
            image = center_crop(image, th, tw);
        }
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                for (int c = 0; c < image.channels; ++c) {
                    const std::size_t at = static_cast<std::size_t>(
                        (static_cast<std::size_t>(y) * image.width + x) * image.channels + c);
                    image.values[at] = (image.values[at] - manifest_.channel_means[static_cast<std::size_t>(c)]) /
                                       manifest_.channel_stds[static_cast<std::size_t>(c)];
                }
            }
        }
        return image;
    }

    Classification classify(const ImageTensor& image) const override {
        check_dims(image);
        TensorValue input;
        input.shape = executor_.input_shape();
        if (input.shape.empty()) {
            input.shape = {1, image.channels, image.height, image.width};
        }
        input.floats.resize(image.size());
        // Channel-major feed order.
        std::size_t at = 0;
        for (int c = 0; c < image.channels; ++c) {
            for (int y = 0; y < image.height; ++y) {
                for (int x = 0; x < image.width; ++x) input.floats[at++] = image.at(y, x, c);
            }
        }
        std::vector<float> scores = executor_.run(std::move(input));
        if (scores.size() != static_cast<std::size_t>(manifest_.class_count)) {
            fail(who(), "graph produced " + std::to_string(scores.size()) +
                            " scores, manifest declares " + std::to_string(manifest_.class_count));
        }
        return make_classification(std::move(scores));
    }

private:
    std::string who() const { return "model '" + manifest_.model_id + "' (" + manifest_.model_path + ")"; }

    static ImageTensor replicate_channels(const ImageTensor& gray) {
        ImageTensor out(gray.height, gray.width, 3);
        for (int y = 0; y < gray.height; ++y) {
            for (int x = 0; x < gray.width; ++x) {
                const float v = gray.at(y, x, 0);
                for (int c = 0; c < 3; ++c) {
                    out.values[(static_cast<std::size_t>(y) * gray.width + x) * 3 +
                               static_cast<std::size_t>(c)] = v;
                }
            }
        }
        return out;
    }

    ModelManifest manifest_;
    GraphExecutor executor_;
};

}  // namespace

OracleHandle load_external_model(const ModelManifest& manifest) {
    manifest.validate();
    const std::string who = "model '" + manifest.model_id + "' (" + manifest.model_path + ")";
    std::ifstream in(manifest.model_path, std::ios::binary);
    if (!in) fail(who, "cannot open model file");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    mpskit_onnx::ModelProto model;
    if (!model.ParseFromString(bytes)) fail(who, "not a parseable model file");
    GraphExecutor executor(std::move(model), who);
    return std::make_shared<ExternalOracle>(manifest, std::move(executor));
}

}  // namespace mpskit
