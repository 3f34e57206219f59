#include "doctest.h"

#include <numeric>
#include <set>

#include "mvt/systems.hpp"

using namespace mvt;

TEST_CASE("rational normalization and parsing") {
    CHECK(Rational(6, 4) == Rational(3, 2));
    CHECK(Rational(-6, 4) == Rational(-3, 2));
    CHECK(Rational(6, -4) == Rational(-3, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(3, 2).to_double() == doctest::Approx(1.5));

    CHECK(parse_rational("3/2") == Rational(3, 2));
    CHECK(parse_rational("-33/18") == Rational(-11, 6));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("-1.2") == Rational(-6, 5));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK_THROWS_AS(parse_rational(""), Error);
    CHECK_THROWS_AS(Rational(1, 0), Error);

    // lowest terms is an invariant of every constructor path
    for (i64 n = -20; n <= 20; ++n)
        for (i64 d = 1; d <= 12; ++d) {
            const Rational r(n, d);
            CHECK(r.den > 0);
            CHECK(std::gcd(r.num < 0 ? -r.num : r.num, r.den) <= 1);
        }
}

TEST_CASE("rational ordering and arithmetic") {
    CHECK(Rational(-2) < Rational(-33, 18));
    CHECK(Rational(-33, 18) <= Rational(-33, 18));
    CHECK(Rational(5) + Rational(-6, 5) == Rational(19, 5));
    CHECK(Rational(3, 2) * Rational(2, 3) == Rational(1));
}

TEST_CASE("dyadic range convention") {
    CHECK(Interval::dyadic(16) == Interval(9, 16));
    CHECK(Interval::dyadic(16).size() == 8);
    CHECK(Interval::dyadic(15) == Interval(8, 15));
    // consecutive dyadic ranges tile without overlap
    CHECK(Interval::dyadic(32).lo == Interval::dyadic(16).hi + 1);
}

TEST_CASE("phase term exact flag") {
    CHECK(PhaseTerm{Rational(2), Rational(0), false}.exact());
    CHECK_FALSE(PhaseTerm{Rational(3, 2), Rational(0), false}.exact());
    CHECK_FALSE(PhaseTerm{Rational(2), Rational(1), false}.exact());
    CHECK_FALSE(PhaseTerm{Rational(2), Rational(0), true}.exact());
}

TEST_CASE("moment spec validation") {
    std::vector<PhaseTerm> terms = {{Rational(1), Rational(0), false},
                                    {Rational(2), Rational(0), false}};
    CHECK_NOTHROW(MomentSpec(16, 4, terms).validate());
    CHECK_THROWS_AS(MomentSpec(16, 5, terms).validate(), Error);  // odd p
    CHECK_THROWS_AS(MomentSpec(2, 4, terms).validate(), Error);   // N too small
    terms.push_back({Rational(2), Rational(1), true});
    CHECK_THROWS_AS(MomentSpec(16, 4, terms).validate(), Error);  // duplicate power
}

TEST_CASE("spec_to_system: first-spacing 8th moment") {
    // delta = N^{-1}: the 3/2-power window is N^{-1} on normalized sums,
    // i.e. sqrt(N) on k^{3/2} sums
    MomentSpec spec(32, 8,
                    {{Rational(1), Rational(0), false},
                     {Rational(2), Rational(0), false},
                     {Rational(3, 2), Rational(1), true}});
    const WindowSystem sys = spec_to_system(spec);
    CHECK(sys.slots(Side::left) == 4);
    CHECK(sys.slots(Side::right) == 4);
    CHECK(sys.exact_forms == std::vector<i64>{1, 2});
    REQUIRE(sys.windowed_forms.size() == 1);
    CHECK(sys.windowed_forms[0].power == Rational(3, 2));
    CHECK(sys.windowed_forms[0].normalized);
    CHECK(sys.windowed_forms[0].tolerance == doctest::Approx(1.0 / 32.0));
    CHECK(sys.windowed_forms[0].tolerance * std::pow(32.0, 1.5) ==
          doctest::Approx(std::sqrt(32.0)));
}

TEST_CASE("spec_to_system: integer phases only") {
    MomentSpec spec(16, 4,
                    {{Rational(1), Rational(0), false}, {Rational(2), Rational(0), false}});
    const WindowSystem sys = spec_to_system(spec);
    CHECK(sys.slots(Side::left) == 2);
    CHECK(sys.exact_forms.size() == 2);
    CHECK(sys.windowed_forms.empty());
}

TEST_CASE("spec_to_system: quartic window family") {
    // lambda = N^{-5/3} puts tolerance N^{5/3} on unnormalized quartic sums
    MomentSpec spec(64, 10,
                    {{Rational(2), Rational(0), false},
                     {Rational(4), Rational(-5, 3), false}});
    const WindowSystem sys = spec_to_system(spec);
    CHECK(sys.slots(Side::left) == 5);
    CHECK(sys.exact_forms == std::vector<i64>{2});
    REQUIRE(sys.windowed_forms.size() == 1);
    CHECK(sys.windowed_forms[0].power == Rational(4));
    CHECK_FALSE(sys.windowed_forms[0].normalized);
    CHECK(sys.windowed_forms[0].tolerance == doctest::Approx(std::pow(64.0, 5.0 / 3.0)));
}

TEST_CASE("spec_to_system shape invariants") {
    MomentSpec spec(24, 6,
                    {{Rational(1), Rational(0), false},
                     {Rational(3, 2), Rational(1, 2), true}});
    const WindowSystem sys = spec_to_system(spec);
    CHECK(sys.slots(Side::left) == spec.p / 2);
    CHECK(sys.exact_forms.size() + sys.windowed_forms.size() == spec.terms.size());
    // deterministic: same spec gives an identical resolved system
    CHECK(spec_to_system(spec).to_json() == sys.to_json());
    // window constant scales tolerances linearly
    CHECK(spec_to_system(spec, 2.0).windowed_forms[0].tolerance ==
          doctest::Approx(2.0 * sys.windowed_forms[0].tolerance));
}

TEST_CASE("fixed point: exact integer embedding and rounding bound") {
    const int bits = FixedPoint::kDefaultScaleBits;
    CHECK(FixedPoint::from_integer(41, bits).value == (i128(41) << bits));
    for (double x : {0.125, 1.0 / 3.0, 123.456, 1e-6}) {
        const FixedPoint fp = FixedPoint::from_double(x, bits);
        const double back = fp.to_double(bits);
        CHECK(std::abs(back - x) <= std::ldexp(1.0, -bits));
    }
    // saturating threshold: +inf never binds; zero is a legal exact match
    const i128 inf_thr = FixedPoint::tolerance_threshold(
        std::numeric_limits<double>::infinity(), bits);
    CHECK(inf_thr > (i128(1) << 100));
    CHECK(FixedPoint::tolerance_threshold(0.0, bits) == 0);
}

TEST_CASE("windowed form values: integer powers take the exact path") {
    const WindowedForm quartic{Rational(4), 1.0, false};
    CHECK(windowed_form_value(quartic, 7, 64, 48).value == (i128(2401) << 48));
    const WindowedForm frac{Rational(3, 2), 1.0, true};
    const double v = windowed_form_value(frac, 32, 64, 48).to_double(48);
    CHECK(v == doctest::Approx(std::pow(0.5, 1.5)).epsilon(1e-12));
}

TEST_CASE("system validation") {
    WindowSystem sys;
    sys.N = 16;
    sys.groups = {{Interval(9, 16), 2, Side::left}, {Interval(9, 16), 2, Side::right}};
    sys.exact_forms = {1, 2};
    CHECK_NOTHROW(sys.validate());

    WindowSystem unbalanced = sys;
    unbalanced.groups[1].multiplicity = 3;
    CHECK_THROWS_AS(unbalanced.validate(), Error);

    WindowSystem overlap = sys;
    overlap.groups.push_back({Interval(10, 12), 1, Side::left});
    overlap.groups.push_back({Interval(9, 9), 1, Side::right});
    CHECK_THROWS_AS(overlap.validate(), Error);

    WindowSystem dup = sys;
    dup.exact_forms = {2, 2};
    CHECK_THROWS_AS(dup.validate(), Error);
}

TEST_CASE("spec file parsing") {
    const std::string text = R"(# an 8th-moment system
N = 32
p = 8
term = 1, 0, unnormalized
term = 2, 0, unnormalized
term = 3/2, 1, normalized
)";
    const MomentSpec spec = parse_spec_text(text);
    CHECK(spec.N == 32);
    CHECK(spec.p == 8);
    CHECK(spec.range == Interval(17, 32));
    REQUIRE(spec.terms.size() == 3);
    CHECK(spec.terms[2].power == Rational(3, 2));
    CHECK(spec.terms[2].normalized);

    // round trip through the text form
    const MomentSpec again = parse_spec_text(spec_to_text(spec));
    CHECK(spec_to_json(again) == spec_to_json(spec));

    CHECK_THROWS_AS(parse_spec_text("p = 8\n"), Error);  // missing N
    CHECK_THROWS_AS(parse_spec_text("N = 32\np = 8\nzz = 1\n"), Error);
    CHECK_THROWS_AS(parse_spec_text("N = 32\np = 8\nterm = 1, 0, nope\n"), Error);
}

TEST_CASE("custom range survives the spec file") {
    const MomentSpec spec =
        parse_spec_text("N = 32\np = 4\nrange = 5, 12\nterm = 1, 0, unnormalized\n");
    CHECK(spec.range == Interval(5, 12));
}
