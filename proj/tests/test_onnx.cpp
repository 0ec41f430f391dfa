#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mpskit/errors.hpp"
#include "mpskit/image.hpp"
#include "mpskit/manifest.hpp"
#include "mpskit/onnx_backend.hpp"
#include "mpskit/oracle.hpp"
#include "onnx_subset.pb.h"
#include "test_helpers.hpp"

using namespace mpskit;

namespace {

mpskit_onnx::TensorProto float_tensor(const std::string& name, std::vector<long long> dims,
                                      std::vector<float> values) {
    mpskit_onnx::TensorProto t;
    t.set_name(name);
    for (long long d : dims) t.add_dims(d);
    t.set_data_type(1);  // float32
    for (float v : values) t.add_float_data(v);
    return t;
}

mpskit_onnx::TensorProto int64_tensor(const std::string& name, std::vector<long long> dims,
                                      std::vector<long long> values) {
    mpskit_onnx::TensorProto t;
    t.set_name(name);
    for (long long d : dims) t.add_dims(d);
    t.set_data_type(7);  // int64
    for (long long v : values) t.add_int64_data(v);
    return t;
}

mpskit_onnx::ModelProto new_model(long long opset = 13) {
    mpskit_onnx::ModelProto model;
    model.set_ir_version(8);
    model.mutable_graph()->set_name("test_graph");
    model.add_opset_import()->set_version(opset);
    return model;
}

void add_data_input(mpskit_onnx::GraphProto* graph, const std::string& name,
                    const std::vector<long long>& dims) {
    auto* input = graph->add_input();
    input->set_name(name);
    auto* tensor = input->mutable_type()->mutable_tensor_type();
    tensor->set_elem_type(1);
    for (long long d : dims) tensor->mutable_shape()->add_dim()->set_dim_value(d);
}

mpskit_onnx::NodeProto* add_node(mpskit_onnx::GraphProto* graph, const std::string& op,
                                 const std::vector<std::string>& inputs,
                                 const std::vector<std::string>& outputs) {
    auto* node = graph->add_node();
    node->set_op_type(op);
    for (const std::string& in : inputs) node->add_input(in);
    for (const std::string& out : outputs) node->add_output(out);
    return node;
}

void set_attr(mpskit_onnx::NodeProto* node, const std::string& name, long long value) {
    auto* attr = node->add_attribute();
    attr->set_name(name);
    attr->set_i(value);
}

void set_attr(mpskit_onnx::NodeProto* node, const std::string& name, float value) {
    auto* attr = node->add_attribute();
    attr->set_name(name);
    attr->set_f(value);
}

std::filesystem::path write_model(const testutil::TempDir& dir,
                                  const mpskit_onnx::ModelProto& model,
                                  const std::string& name) {
    const std::filesystem::path path = dir.path() / name;
    std::ofstream out(path, std::ios::binary);
    const std::string bytes = model.SerializeAsString();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return path;
}

ModelManifest basic_manifest(const std::string& id, const std::filesystem::path& path, int h,
                             int w, int channels, int classes) {
    ModelManifest manifest;
    manifest.model_id = id;
    manifest.architecture_tag = "test";
    manifest.model_path = path.string();
    manifest.input_height = h;
    manifest.input_width = w;
    manifest.channel_means.assign(static_cast<std::size_t>(channels), 0.f);
    manifest.channel_stds.assign(static_cast<std::size_t>(channels), 1.f);
    manifest.class_count = classes;
    return manifest;
}

// Identity graph sized for preprocess-only tests.
OracleHandle identity_oracle(const testutil::TempDir& dir, const std::string& id, int h, int w,
                             int channels) {
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    const long long n = static_cast<long long>(h) * w * channels;
    add_data_input(graph, "input", {1, n});
    add_node(graph, "Identity", {"input"}, {"scores"});
    graph->add_output()->set_name("scores");
    const auto path = write_model(dir, model, id + ".onnx");
    return load_external_model(
        basic_manifest(id, path, h, w, channels, static_cast<int>(n)));
}

ImageTensor flat_image(int h, int w, std::vector<float> values) {
    ImageTensor image(h, w, 1);
    image.values = std::move(values);
    return image;
}

}  // namespace

TEST_CASE("gemm applies alpha, beta, and transposed weights") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 4});
    const std::vector<float> w = {1, 0, 2, -1,   // class 0
                                  0, 1, 0, 3,    // class 1
                                  -2, 1, 1, 0};  // class 2
    graph->add_initializer()->CopyFrom(float_tensor("w", {3, 4}, w));
    graph->add_initializer()->CopyFrom(float_tensor("b", {3}, {10, 20, 30}));
    auto* gemm = add_node(graph, "Gemm", {"input", "w", "b"}, {"scores"});
    set_attr(gemm, "alpha", 0.5f);
    set_attr(gemm, "beta", 2.0f);
    set_attr(gemm, "transB", 1LL);
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "gemm.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("gemm", path, 2, 2, 1, 3));
    const ImageTensor image = flat_image(2, 2, {1, 2, 3, 4});
    const Classification result = oracle->classify(image);

    for (int cls = 0; cls < 3; ++cls) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
            acc += static_cast<double>(image.values[static_cast<std::size_t>(k)]) *
                   w[static_cast<std::size_t>(cls * 4 + k)];
        }
        const float expected =
            0.5f * static_cast<float>(acc) + 2.0f * (10.f + 10.f * static_cast<float>(cls));
        CHECK(result.scores[static_cast<std::size_t>(cls)] ==
              doctest::Approx(expected).epsilon(1e-6));
    }
    CHECK(result.class_index == 2);  // 0.5*1 + 60 wins
}

TEST_CASE("flatten, gemm, relu chain matches a hand computation") {
    testutil::TempDir dir;
    const int channels = 3, h = 2, w = 2, hidden = 4, classes = 3;
    const int flat = channels * h * w;
    std::vector<float> w1(static_cast<std::size_t>(hidden * flat));
    std::vector<float> b1(static_cast<std::size_t>(hidden));
    std::vector<float> w2(static_cast<std::size_t>(classes * hidden));
    std::vector<float> b2(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = std::sin(0.37 * static_cast<double>(i + 1));
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] = 0.1f * static_cast<float>(i);
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = std::cos(0.53 * static_cast<double>(i + 1));
    for (std::size_t i = 0; i < b2.size(); ++i) b2[i] = -0.2f * static_cast<float>(i);

    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, channels, h, w});
    graph->add_initializer()->CopyFrom(float_tensor("w1", {hidden, flat}, w1));
    graph->add_initializer()->CopyFrom(float_tensor("b1", {hidden}, b1));
    graph->add_initializer()->CopyFrom(float_tensor("w2", {classes, hidden}, w2));
    graph->add_initializer()->CopyFrom(float_tensor("b2", {classes}, b2));
    auto* flat_node = add_node(graph, "Flatten", {"input"}, {"flat"});
    set_attr(flat_node, "axis", 1LL);
    auto* g1 = add_node(graph, "Gemm", {"flat", "w1", "b1"}, {"h1"});
    set_attr(g1, "transB", 1LL);
    add_node(graph, "Relu", {"h1"}, {"h2"});
    auto* g2 = add_node(graph, "Gemm", {"h2", "w2", "b2"}, {"scores"});
    set_attr(g2, "transB", 1LL);
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "mlp.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("mlp", path, h, w, channels, classes));

    ImageTensor image(h, w, channels);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        image.values[i] = 0.05f * static_cast<float>(i) - 0.3f;
    }
    const Classification result = oracle->classify(image);

    // The graph consumes pixels channel-major, so flatten the same way.
    std::vector<float> x;
    for (int c = 0; c < channels; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) x.push_back(image.at(y, xx, c));
        }
    }
    std::vector<float> layer1(static_cast<std::size_t>(hidden));
    for (int j = 0; j < hidden; ++j) {
        double acc = 0.0;
        for (int k = 0; k < flat; ++k) {
            acc += static_cast<double>(x[static_cast<std::size_t>(k)]) *
                   w1[static_cast<std::size_t>(j * flat + k)];
        }
        layer1[static_cast<std::size_t>(j)] =
            std::max(0.f, static_cast<float>(acc) + b1[static_cast<std::size_t>(j)]);
    }
    for (int cls = 0; cls < classes; ++cls) {
        double acc = 0.0;
        for (int k = 0; k < hidden; ++k) {
            acc += static_cast<double>(layer1[static_cast<std::size_t>(k)]) *
                   w2[static_cast<std::size_t>(cls * hidden + k)];
        }
        const float expected = static_cast<float>(acc) + b2[static_cast<std::size_t>(cls)];
        CHECK(result.scores[static_cast<std::size_t>(cls)] ==
              doctest::Approx(expected).epsilon(1e-5));
    }
}

TEST_CASE("matmul and broadcast add match the in-process linear oracle") {
    testutil::TempDir dir;
    const std::vector<float> w_rows = {0.5f, -1.f, 2.f,  0.25f,   // class 0
                                       1.f,  1.f,  -1.f, 0.f,     // class 1
                                       -2.f, 0.5f, 0.f,  1.f};    // class 2
    std::vector<float> w_cols(12);  // transpose into 4x3 for the MatMul layout
    for (int k = 0; k < 4; ++k) {
        for (int cls = 0; cls < 3; ++cls) {
            w_cols[static_cast<std::size_t>(k * 3 + cls)] = w_rows[static_cast<std::size_t>(cls * 4 + k)];
        }
    }
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 4});
    graph->add_initializer()->CopyFrom(float_tensor("w", {4, 3}, w_cols));
    graph->add_initializer()->CopyFrom(float_tensor("b", {1, 3}, {0, 0, 0}));
    add_node(graph, "MatMul", {"input", "w"}, {"mm"});
    add_node(graph, "Add", {"mm", "b"}, {"scores"});
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "matmul.onnx");
    OracleHandle external = load_external_model(basic_manifest("matmul", path, 2, 2, 1, 3));

    SyntheticOracleSpec spec;
    spec.kind = SyntheticKind::linear;
    spec.model_id = "linear_ref";
    spec.architecture_tag = "synthetic";
    spec.input_height = 2;
    spec.input_width = 2;
    spec.input_channels = 1;
    spec.weights = w_rows;
    spec.linear_class_count = 3;
    OracleHandle reference = make_synthetic_oracle(spec);

    const ImageTensor image = flat_image(2, 2, {0.9f, -0.1f, 0.4f, 0.7f});
    const Classification a = external->classify(image);
    const Classification b = reference->classify(image);
    CHECK(a.class_index == b.class_index);
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i] == doctest::Approx(b.scores[i]).epsilon(1e-6));
    }
}

TEST_CASE("reshape resolves copied and inferred dimensions") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 3, 2, 2});
    graph->add_initializer()->CopyFrom(int64_tensor("shape", {2}, {0, -1}));
    std::vector<float> w(24, 0.f);
    for (int k = 0; k < 12; ++k) {
        w[static_cast<std::size_t>(k)] = 1.f;           // class 0 sums everything
        w[static_cast<std::size_t>(12 + k)] = k < 6 ? 1.f : 0.f;  // class 1 sums the first half
    }
    graph->add_initializer()->CopyFrom(float_tensor("w", {2, 12}, w));
    graph->add_initializer()->CopyFrom(float_tensor("b", {2}, {0, 0}));
    add_node(graph, "Reshape", {"input", "shape"}, {"flat"});
    auto* gemm = add_node(graph, "Gemm", {"flat", "w", "b"}, {"scores"});
    set_attr(gemm, "transB", 1LL);
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "reshape.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("reshape", path, 2, 2, 3, 2));
    ImageTensor image(2, 2, 3);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        image.values[i] = static_cast<float>(i + 1);
    }
    const Classification result = oracle->classify(image);
    // Channel-major feed: the first six positions are all of channel 0 and
    // the first row of channel 1. The total is order-free.
    float total = 0.f, half = 0.f;
    int position = 0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 2; ++y) {
            for (int x = 0; x < 2; ++x) {
                total += image.at(y, x, c);
                if (position < 6) half += image.at(y, x, c);
                ++position;
            }
        }
    }
    CHECK(result.scores[0] == doctest::Approx(total));
    CHECK(result.scores[1] == doctest::Approx(half));
}

TEST_CASE("identity and constant nodes pass values through") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 4});
    add_node(graph, "Identity", {"input"}, {"copy"});
    auto* constant = add_node(graph, "Constant", {}, {"offset"});
    auto* attr = constant->add_attribute();
    attr->set_name("value");
    attr->mutable_t()->CopyFrom(float_tensor("offset_value", {1, 4}, {10, 20, 30, 40}));
    add_node(graph, "Add", {"copy", "offset"}, {"scores"});
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "identity.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("identity", path, 2, 2, 1, 4));
    const Classification result = oracle->classify(flat_image(2, 2, {1, 2, 3, 4}));
    CHECK(result.scores == std::vector<float>{11, 22, 33, 44});
    CHECK(result.class_index == 3);
}

TEST_CASE("softmax rescales without changing the ranking") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model(13);
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 3});
    add_node(graph, "Softmax", {"input"}, {"scores"});
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "softmax.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("softmax", path, 1, 3, 1, 3));
    const std::vector<float> logits = {1.f, -0.5f, 2.f};
    const Classification result = oracle->classify(flat_image(1, 3, logits));

    double total = 0.0;
    for (float v : logits) total += std::exp(static_cast<double>(v) - 2.0);
    float sum = 0.f;
    for (std::size_t i = 0; i < 3; ++i) {
        const double expected = std::exp(static_cast<double>(logits[i]) - 2.0) / total;
        CHECK(result.scores[i] == doctest::Approx(expected).epsilon(1e-6));
        sum += result.scores[i];
    }
    CHECK(sum == doctest::Approx(1.f).epsilon(1e-6));
    CHECK(result.class_index == 2);
}

TEST_CASE("sigmoid squashes each score") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 4});
    add_node(graph, "Sigmoid", {"input"}, {"scores"});
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "sigmoid.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("sigmoid", path, 2, 2, 1, 4));
    const std::vector<float> values = {-2.f, -0.5f, 0.f, 3.f};
    const Classification result = oracle->classify(flat_image(2, 2, values));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double expected = 1.0 / (1.0 + std::exp(-static_cast<double>(values[i])));
        CHECK(result.scores[i] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("load rejects unsupported graphs and unreadable files") {
    testutil::TempDir dir;

    SUBCASE("operator outside the supported set") {
        mpskit_onnx::ModelProto model = new_model();
        auto* graph = model.mutable_graph();
        add_data_input(graph, "input", {1, 3, 8, 8});
        add_node(graph, "Conv", {"input", "w"}, {"scores"});
        graph->add_output()->set_name("scores");
        const auto path = write_model(dir, model, "conv.onnx");
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("conv", path, 8, 8, 3, 2)),
                             doctest::Contains("unsupported"), BackendError);
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("conv", path, 8, 8, 3, 2)),
                             doctest::Contains("Conv"), BackendError);
    }

    SUBCASE("garbage bytes") {
        const auto path = dir.path() / "junk.onnx";
        std::ofstream(path) << "this is not a serialized model";
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("junk", path, 2, 2, 1, 2)),
                             doctest::Contains("not a parseable model file"), BackendError);
    }

    SUBCASE("missing file") {
        const auto path = dir.path() / "missing.onnx";
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("missing", path, 2, 2, 1, 2)),
                             doctest::Contains("cannot open"), BackendError);
    }

    SUBCASE("two data inputs") {
        mpskit_onnx::ModelProto model = new_model();
        auto* graph = model.mutable_graph();
        add_data_input(graph, "a", {1, 4});
        add_data_input(graph, "b", {1, 4});
        add_node(graph, "Add", {"a", "b"}, {"scores"});
        graph->add_output()->set_name("scores");
        const auto path = write_model(dir, model, "two_inputs.onnx");
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("two", path, 2, 2, 1, 4)),
                             doctest::Contains("more than one data input"), BackendError);
    }

    SUBCASE("graph input disagrees with manifest dimensions") {
        mpskit_onnx::ModelProto model = new_model();
        auto* graph = model.mutable_graph();
        add_data_input(graph, "input", {1, 8});
        add_node(graph, "Identity", {"input"}, {"scores"});
        graph->add_output()->set_name("scores");
        const auto path = write_model(dir, model, "mismatch.onnx");
        CHECK_THROWS_WITH_AS(load_external_model(basic_manifest("mismatch", path, 2, 2, 1, 8)),
                             doctest::Contains("does not match manifest"), BackendError);
    }
}

TEST_CASE("classify rejects a score count that disagrees with the manifest") {
    testutil::TempDir dir;
    mpskit_onnx::ModelProto model = new_model();
    auto* graph = model.mutable_graph();
    add_data_input(graph, "input", {1, 4});
    graph->add_initializer()->CopyFrom(
        float_tensor("w", {3, 4}, std::vector<float>(12, 1.f)));
    auto* gemm = add_node(graph, "Gemm", {"input", "w"}, {"scores"});
    set_attr(gemm, "transB", 1LL);
    graph->add_output()->set_name("scores");

    const auto path = write_model(dir, model, "count.onnx");
    OracleHandle oracle = load_external_model(basic_manifest("count", path, 2, 2, 1, 4));
    CHECK_THROWS_WITH_AS(oracle->classify(flat_image(2, 2, {1, 1, 1, 1})),
                         doctest::Contains("declares 4"), BackendError);
}

TEST_CASE("preprocess stretches, replicates gray, and normalizes") {
    testutil::TempDir dir;

    SUBCASE("stretch resize keeps corners and replicates a gray channel") {
        OracleHandle oracle = identity_oracle(dir, "stretch", 4, 4, 3);
        ImageTensor gray = flat_image(2, 2, {0, 1, 2, 3});
        const ImageTensor prepared = oracle->preprocess(gray);
        CHECK(prepared.height == 4);
        CHECK(prepared.width == 4);
        CHECK(prepared.channels == 3);
        for (int c = 0; c < 3; ++c) {
            CHECK(prepared.at(0, 0, c) == doctest::Approx(0.f));
            CHECK(prepared.at(0, 3, c) == doctest::Approx(1.f));
            CHECK(prepared.at(3, 0, c) == doctest::Approx(2.f));
            CHECK(prepared.at(3, 3, c) == doctest::Approx(3.f));
        }
        // Every channel carries the same replicated values.
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                CHECK(prepared.at(y, x, 1) == prepared.at(y, x, 0));
                CHECK(prepared.at(y, x, 2) == prepared.at(y, x, 0));
            }
        }
    }

    SUBCASE("shorter side strategy crops the center") {
        identity_oracle(dir, "crop", 4, 4, 1);  // writes crop.onnx
        ImageTensor wide(4, 8, 1);
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 8; ++x) wide.values[static_cast<std::size_t>(y * 8 + x)] = static_cast<float>(x);
        }
        ModelManifest manifest = basic_manifest("crop2", dir.path() / "crop.onnx", 4, 4, 1, 16);
        manifest.resize_strategy = ResizeStrategy::shorter_side_then_center_crop;
        OracleHandle cropping = load_external_model(manifest);
        const ImageTensor prepared = cropping->preprocess(wide);
        CHECK(prepared.height == 4);
        CHECK(prepared.width == 4);
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) {
                CHECK(prepared.at(y, x, 0) == doctest::Approx(static_cast<float>(x + 2)));
            }
        }
    }

    SUBCASE("per-channel normalization") {
        identity_oracle(dir, "norm_base", 1, 1, 3);  // writes norm_base.onnx
        ModelManifest manifest =
            basic_manifest("norm", dir.path() / "norm_base.onnx", 1, 1, 3, 3);
        manifest.channel_means = {1.f, 2.f, 3.f};
        manifest.channel_stds = {2.f, 4.f, 8.f};
        OracleHandle oracle = load_external_model(manifest);
        ImageTensor pixel(1, 1, 3);
        pixel.values = {3.f, 6.f, 11.f};
        const ImageTensor prepared = oracle->preprocess(pixel);
        CHECK(prepared.at(0, 0, 0) == doctest::Approx(1.f));
        CHECK(prepared.at(0, 0, 1) == doctest::Approx(1.f));
        CHECK(prepared.at(0, 0, 2) == doctest::Approx(1.f));
    }

    SUBCASE("channel mismatch is a data error") {
        OracleHandle oracle = identity_oracle(dir, "chan", 2, 2, 3);
        ImageTensor two(2, 2, 2);
        CHECK_THROWS_AS(oracle->preprocess(two), DataError);
    }
}

TEST_CASE("externally trained fixture reproduces its reference scores") {
    const char* fixture_dir = std::getenv("MPSKIT_ONNX_FIXTURE");
    if (fixture_dir == nullptr) {
        MESSAGE("MPSKIT_ONNX_FIXTURE not set; fixture comparison runs in its own test entry");
        return;
    }
    const std::filesystem::path dir(fixture_dir);
    const std::vector<ModelManifest> entries = load_manifest(dir / "manifest.json");
    REQUIRE(entries.size() == 1);
    OracleHandle oracle = load_external_model(entries[0]);

    std::ifstream in(dir / "fixture.json");
    REQUIRE(in.good());
    const nlohmann::json fixture = nlohmann::json::parse(in);
    const int channels = fixture.at("channels").get<int>();
    const int height = fixture.at("height").get<int>();
    const int width = fixture.at("width").get<int>();
    const std::vector<float> chw = fixture.at("input_chw").get<std::vector<float>>();
    const std::vector<float> expected = fixture.at("scores").get<std::vector<float>>();
    REQUIRE(chw.size() == static_cast<std::size_t>(channels * height * width));

    ImageTensor image(height, width, channels);
    std::size_t at = 0;
    for (int c = 0; c < channels; ++c) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                image.values[static_cast<std::size_t>((y * width + x) * channels + c)] = chw[at++];
            }
        }
    }
    const Classification result = oracle->classify(oracle->preprocess(image));
    REQUIRE(result.scores.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(result.scores[i] == doctest::Approx(expected[i]).epsilon(1e-4));
    }
}
