#include <doctest.h>

#include "hetmix/dataset.hpp"
#include "hetmix/errors.hpp"
#include "support.hpp"

using namespace hetmix;
using namespace hetmix::testing;

TEST_SUITE("data_model") {

TEST_CASE("conforming dataset yields an empty report") {
    Dataset d({real_var("x"), ordinal_var("g", {1, 2, 3}), categorical_var("c", {"a", "b"})},
              {Real{1.0}, OrdinalLevel{1}, Category{0},  //
               Real{2.0}, OrdinalLevel{3}, Category{1}});
    const auto report = validate_dataset(d);
    CHECK(report.ok());
    CHECK(report.cells.empty());
}

TEST_CASE("out-of-domain ordinal names the offending cell") {
    std::vector<int> levels{1, 2, 3, 4, 5, 6, 7, 8};
    Dataset d({ordinal_var("gose", levels), real_var("x")},
              {OrdinalLevel{3}, Real{0.5}, OrdinalLevel{9}, Real{1.5}, OrdinalLevel{8}, Real{2.5}});
    const auto report = validate_dataset(d);
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].subject == 1);
    CHECK(report.cells[0].variable == 0);
    CHECK(report.cells[0].message.find("gose") != std::string::npos);
}

TEST_CASE("type mismatches and negative nonnegatives are violations") {
    Dataset d({nonneg_var("n"), real_var("x")}, {Nonnegative{-1.0}, OrdinalLevel{2}, Nonnegative{1.0}, Real{1.0}});
    CHECK(validate_dataset(d).cells.size() == 2);
}

TEST_CASE("entirely missing column is flagged as zero variability") {
    Dataset d({real_var("x"), real_var("empty")},
              {Real{1.0}, Missing{}, Real{2.0}, Missing{}, Real{3.0}, Missing{}});
    const auto report = validate_dataset(d);
    CHECK(report.cells.empty());
    REQUIRE(report.zero_variability.size() == 1);
    CHECK(report.zero_variability[0] == "empty");
    CHECK_FALSE(report.ok());
}

TEST_CASE("constant observed column is flagged as zero variability") {
    Dataset d({categorical_var("c", {"a", "b"}), real_var("x")},
              {Category{1}, Real{1.0}, Missing{}, Real{2.0}, Category{1}, Real{3.0}});
    const auto report = validate_dataset(d);
    REQUIRE(report.zero_variability.size() == 1);
    CHECK(report.zero_variability[0] == "c");
}

TEST_CASE("malformed schemas are rejected") {
    CHECK_THROWS_AS(Dataset({ordinal_var("g", {3, 2})}, {OrdinalLevel{3}}), ValidationError);
    CHECK_THROWS_AS(Dataset({categorical_var("c", {"a"})}, {Category{0}}), ValidationError);
    CHECK_THROWS_AS(Dataset({real_var("x"), real_var("y")}, {Real{1.0}}), ValidationError);
}

TEST_CASE("duplicate variable names are reported") {
    Dataset d({real_var("x"), real_var("x")}, {Real{1.0}, Real{2.0}, Real{3.0}, Real{4.0}});
    CHECK_FALSE(validate_dataset(d).schema.empty());
}

TEST_CASE("missingness curve without missing cells") {
    Dataset d({real_var("x"), real_var("y")}, {Real{1.0}, Real{2.0}, Real{3.0}, Real{4.0}});
    const auto p = missingness_profile(d);
    CHECK(p.subjects_with_at_least(0) == 2);
    CHECK(p.subjects_with_at_least(1) == 0);
    CHECK(p.subjects_with_at_least(2) == 0);
}

TEST_CASE("missingness curve counted by hand") {
    // subjects with 0, 2 and 2 missing cells
    Dataset d({real_var("x"), real_var("y"), real_var("z")},
              {Real{1.0}, Real{1.0}, Real{1.0},  //
               Missing{}, Missing{}, Real{2.0},  //
               Real{3.0}, Missing{}, Missing{}});
    const auto p = missingness_profile(d);
    CHECK(p.per_subject == std::vector<std::size_t>{0, 2, 2});
    CHECK(p.subjects_with_at_least(0) == 3);
    CHECK(p.subjects_with_at_least(1) == 2);
    CHECK(p.subjects_with_at_least(2) == 2);
    CHECK(p.subjects_with_at_least(3) == 0);
    CHECK(p.subjects_with_at_least(7) == 0);
}

TEST_CASE("curve at zero is the subject count and non-increasing") {
    Rng rng(3);
    const auto m = random_model(rng, 2, 6);
    const auto cohort = sample_cohort(m, 50, rng);
    const auto p = missingness_profile(cohort.data);
    CHECK(p.at_least[0] == 50);
    for (std::size_t k = 1; k < p.at_least.size(); ++k) CHECK(p.at_least[k] <= p.at_least[k - 1]);
}

TEST_CASE("subset, without_subject and select_columns") {
    Dataset d({real_var("x"), ordinal_var("g", {1, 2}, Role::Outcome)},
              {Real{1.0}, OrdinalLevel{1}, Real{2.0}, OrdinalLevel{2}, Real{3.0}, Missing{}});
    const auto w = d.without_subject(1);
    CHECK(w.subjects() == 2);
    CHECK(w.at(1, 0) == Value{Real{3.0}});
    const std::vector<std::size_t> pick{2, 0};
    CHECK(d.subset(pick).at(0, 0) == Value{Real{3.0}});
    const std::vector<std::size_t> cols{1};
    const auto c = d.select_columns(cols);
    CHECK(c.variables() == 1);
    CHECK(c.schema(0).name == "g");
    CHECK(d.outcome_variables() == std::vector<std::size_t>{1});
    CHECK(d.input_variables() == std::vector<std::size_t>{0});
    CHECK(d.index_of("g") == 1);
    CHECK_THROWS_AS(d.index_of("nope"), std::out_of_range);
}

TEST_CASE("kind and role names round-trip") {
    for (auto k : {VariableKind::ContinuousReal, VariableKind::ContinuousNonnegative, VariableKind::Ordinal,
                   VariableKind::Categorical})
        CHECK(parse_kind(to_string(k)) == k);
    CHECK(parse_role("outcome") == Role::Outcome);
    CHECK_THROWS(parse_kind("banana"));
}

}
