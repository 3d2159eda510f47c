#include <gtest/gtest.h>

#include <numbers>

#include "mifisher/io.hpp"

using namespace mifisher;
using io::json;

namespace {

const std::string kData = MIFISHER_TEST_DATA;

json qubit_matrix(double a, double b, double c, double d) { return json::array({json::array({json::array({a, 0.0}), json::array({b, 0.0})}), json::array({json::array({c, 0.0}), json::array({d, 0.0})})}); }

}  // namespace

TEST(ParseMatrix, ComplexPairs) {
    const CMatrix m = io::parse_matrix(json::parse(R"([[[1, 0], [0, -1]], [[0, 1], [2.5, 0]]])"));
    EXPECT_EQ(m(0, 1), cplx(0.0, -1.0));
    EXPECT_EQ(m(1, 0), cplx(0.0, 1.0));
    EXPECT_EQ(m(1, 1), cplx(2.5, 0.0));
    EXPECT_LE(max_abs_diff(io::parse_matrix(io::matrix_to_json(m)), m), 0.0);
}

TEST(ParseMatrix, Rejections) {
    EXPECT_THROW(io::parse_matrix(json::parse(R"([[[1, 0]], [[0, 0], [1, 0]]])")), io::SpecError);
    EXPECT_THROW(io::parse_matrix(json::parse(R"([[1, 0]])")), io::SpecError);
    EXPECT_THROW(io::parse_matrix(json::parse(R"([])")), io::SpecError);
    EXPECT_THROW(io::parse_matrix(json::parse(R"([[["1", 0]]])")), io::SpecError);
}

TEST(ParseFamily, Builtin) {
    const Family f = io::parse_family(json::parse(R"({"version": 1, "kind": "builtin", "name": "cossin"})"));
    EXPECT_EQ(f.builtin_name(), BuiltinName::CosSin);
    EXPECT_EQ(*f.dims(), (BipartiteDims{2, 2}));
}

TEST(ParseFamily, ProductOf) {
    const Family f = io::parse_family(json::parse(R"({"kind": "builtin", "name": "product_of", "factors": [{"kind": "builtin", "name": "qubit_phase"}, {"kind": "builtin", "name": "qubit_bernoulli"}]})"));
    EXPECT_EQ(f.dim(), 4u);
    EXPECT_NEAR(qfi(f, 0.5), 1.0 + 4.0, 1e-9);
}

TEST(ParseFamily, GeneratorAndGrid) {
    const Family g = io::parse_family(io::load_json_file(kData + "/family_bell_generator.json"));
    EXPECT_EQ(g.kind(), Family::Kind::Generator);
    EXPECT_NEAR(qfi(g, 0.3), 1.0, 1e-9);
    const Family grid = io::parse_family(io::load_json_file(kData + "/family_cc_grid.json"));
    EXPECT_EQ(grid.kind(), Family::Kind::Grid);
    EXPECT_NEAR(qfi(grid, 0.5), 4.0, 1e-6);
}

TEST(ParseFamily, Rejections) {
    EXPECT_THROW(io::parse_family(json::parse(R"({"kind": "builtin", "name": "cossin", "extra": 1})")), io::SpecError);
    EXPECT_THROW(io::parse_family(json::parse(R"({"version": 2, "kind": "builtin", "name": "cossin"})")), io::SpecError);
    EXPECT_THROW(io::parse_family(json::parse(R"({"kind": "mystery"})")), io::SpecError);
    EXPECT_THROW(io::parse_family(json::parse(R"({"kind": "builtin", "name": "cossin", "factors": [{"kind": "builtin", "name": "qubit_zero"}, {"kind": "builtin", "name": "qubit_zero"}]})")),
                 io::SpecError);
    try {
        io::parse_family(io::load_json_file(kData + "/semantic/family_not_density.json"));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidState);
    }
}

TEST(ParsePovm, ArrayAndObjectForms) {
    const json els = json::array({qubit_matrix(1, 0, 0, 0), qubit_matrix(0, 0, 0, 1)});
    EXPECT_EQ(io::parse_povm(els).size(), 2u);
    EXPECT_EQ(io::parse_povm(json{{"version", 1}, {"elements", els}}).size(), 2u);
    EXPECT_THROW(io::parse_povm(json{{"elements", els}, {"labels", 1}}), io::SpecError);
    EXPECT_FALSE(validate(io::parse_povm(io::load_json_file(kData + "/semantic/povm_incomplete.json"))).pass());
}

TEST(ParseChain, AllTypes) {
    const BipartiteDims dims{2, 2};
    const auto chain = io::parse_chain(io::load_json_file(kData + "/chain_mixed.json"), dims);
    ASSERT_EQ(chain.size(), 3u);
    for (const auto &ch : chain) EXPECT_EQ(ch.dim_in(), 4u);
    EXPECT_EQ(chain[0].label(), "depolarizing(0.200000)_a");
    EXPECT_EQ(io::parse_chain(io::load_json_file(kData + "/chain_cnot_cnot.json"), dims)[1].label(), "cnot_2");
    EXPECT_TRUE(io::parse_chain(io::load_json_file(kData + "/chain_empty.json"), dims).empty());
}

TEST(ParseChain, Rejections) {
    const BipartiteDims dims{2, 2};
    EXPECT_THROW(io::parse_chain(json::parse(R"([{"type": "swap"}])"), dims), io::SpecError);
    EXPECT_THROW(io::parse_chain(json::parse(R"([{"type": "depolarizing", "q": 0.1}])"), dims), io::SpecError);
    EXPECT_THROW(io::parse_chain(json::parse(R"([{"type": "cnot"}])"), BipartiteDims{2, 3}), io::SpecError);
    try {
        io::parse_chain(io::load_json_file(kData + "/semantic/chain_not_trace_preserving.json"), dims);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::NotTracePreserving);
    }
}

TEST(ParseConfig, Fields) {
    const io::RunConfig c = io::parse_config(io::load_json_file(kData + "/config.json"));
    EXPECT_EQ(c.starts, 8);
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.fd_step, 1e-5);
    const OptimizerConfig oc = c.optimizer();
    EXPECT_EQ(oc.starts, 8);
    EXPECT_EQ(oc.derivative.step, 1e-5);
}

TEST(ParseConfig, Rejections) {
    EXPECT_THROW(io::parse_config(json::parse(R"({"fd_step": -1})")), io::SpecError);
    EXPECT_THROW(io::parse_config(json::parse(R"({"starts": 0})")), io::SpecError);
    EXPECT_THROW(io::parse_config(json::parse(R"({"colour": "blue"})")), io::SpecError);
    EXPECT_THROW(io::parse_config(json::parse(R"({"tolerances": {"slack": 1}})")), io::SpecError);
    EXPECT_THROW(io::parse_config(json::parse(R"({"format": "xml"})")), io::SpecError);
}

TEST(Numbers, TwelveSignificantDigits) {
    EXPECT_EQ(io::num(1.0 / 3.0).dump(), "0.333333333333");
    EXPECT_EQ(io::num(-0.0).dump(), "0.0");
    EXPECT_EQ(io::num(1.0000000000004).dump(), "1.0");
    EXPECT_TRUE(io::num(std::numeric_limits<double>::infinity()).is_null());
    EXPECT_EQ(io::fmt(std::numbers::pi), "3.14159265359");
    EXPECT_EQ(io::fmt(-0.0), "0");
}

TEST(Csv, HeaderIsFixed) {
    EXPECT_EQ(io::csv_header(), "theta,fi_local_a,fi_local_b,fi_product_lb,fi_adaptive_ab_lb,fi_adaptive_ba_lb,fi_global");
}
