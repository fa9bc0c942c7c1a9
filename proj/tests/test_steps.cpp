#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "patharea/steps.hpp"

using namespace patharea;

namespace {

std::string error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST(Steps, CompactSpecRoundTrips) {
    const auto s = parse_step_set("1:2, -1:1/2 , 0:1");
    EXPECT_EQ(s.to_compact(), "-1:1/2,0:1,1:2");
    EXPECT_EQ(parse_step_set(s.to_compact()), s);
    EXPECT_EQ(s.c(), 1);
    EXPECT_EQ(s.d(), 1);
    EXPECT_FALSE(s.integer_weights());
}

TEST(Steps, JsonSpecMatchesCompactSpec) {
    const auto a = parse_step_set(R"({"-2": 1, "-1": "1", "1": 1})", StepFormat::json);
    const auto b = parse_step_set("-2:1,-1:1,1:1");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.c(), 2);
    EXPECT_EQ(a.d(), 1);
    EXPECT_EQ(to_json(a).dump(), R"({"-1":"1","-2":"1","1":"1"})");
}

TEST(Steps, RejectsOneSidedAndDegenerateSets) {
    EXPECT_EQ(error_code([] { parse_step_set("0:1,1:1"); }), "steps.NoNegativeStep");
    EXPECT_EQ(error_code([] { parse_step_set("-1:1,0:1"); }), "steps.NoPositiveStep");
    EXPECT_EQ(error_code([] { parse_step_set("-1:0,1:1"); }), "steps.ZeroWeight");
    EXPECT_EQ(error_code([] { parse_step_set("-1:1,1"); }), "steps.MalformedSpec");
    EXPECT_EQ(error_code([] { parse_step_set(""); }), "steps.MalformedSpec");
}

TEST(Steps, DuplicateStepsAreRejected) {
    EXPECT_FALSE(error_code([] { parse_step_set("-1:1,1:1,1:2"); }).empty());
}

TEST(Steps, CharacteristicsOfStandardSets) {
    const auto motzkin = characteristics(parse_step_set("-1:1,0:1,1:1"));
    EXPECT_EQ(motzkin.drift, 0);
    EXPECT_EQ(motzkin.variance, Rational(2, 3));
    EXPECT_TRUE(motzkin.aperiodic);

    const auto neg = characteristics(parse_step_set("-1:2,0:1,1:1"));
    EXPECT_EQ(neg.drift, Rational(-1, 4));

    const auto pos = characteristics(parse_step_set("-1:1,0:1,1:2"));
    EXPECT_EQ(pos.drift, Rational(1, 4));
    EXPECT_EQ(pos.variance, Rational(11, 16));

    const auto dyck = characteristics(parse_step_set("-1:1,1:1"));
    EXPECT_EQ(dyck.period, 2);
    EXPECT_FALSE(dyck.aperiodic);
}

TEST(Steps, ExactAndFloatEvaluationAgree) {
    const auto s = parse_step_set("-2:1,-1:3,1:1/2,2:2");
    for (const Rational& u : {Rational(1, 3), Rational(1), Rational(5, 2)})
        for (int order = 0; order <= 2; ++order)
            EXPECT_NEAR(to_double(eval_step_polynomial(s, u, order)), eval_step_polynomial(s, to_double(u), order),
                        1e-12 * (1 + std::fabs(to_double(eval_step_polynomial(s, u, order)))));
    EXPECT_EQ(eval_step_polynomial(s, Rational(1), 0), Rational(13, 2));
}

TEST(Steps, NonpositiveArgumentIsRejected) {
    const auto s = parse_step_set("-1:1,1:1");
    EXPECT_EQ(error_code([&] { eval_step_polynomial(s, Rational(0), 0); }), "steps.NonpositiveArgument");
    EXPECT_EQ(error_code([&] { eval_step_polynomial(s, -1.0, 1); }), "steps.NonpositiveArgument");
}

TEST(Steps, SymmetryFlag) {
    EXPECT_TRUE(parse_step_set("-1:1,0:5,1:1").symmetric());
    EXPECT_FALSE(parse_step_set("-1:1,1:2").symmetric());
}
