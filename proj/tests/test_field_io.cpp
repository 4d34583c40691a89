// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "speccoh/field.hpp"
#include "test_helpers.hpp"

using namespace speccoh;

namespace {

std::string to_bytes(const MultiField& f) {
    std::ostringstream os(std::ios::binary);
    write_field(f, os);
    return os.str();
}

MultiField from_bytes(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    return read_field(is);
}

}  // namespace

TEST_CASE("MFLD1 round trip is bit exact") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 3);
        std::vector<int> sizes(d);
        std::vector<double> spac(d);
        for (int ax = 0; ax < d; ++ax) {
            sizes[ax] = 1 + static_cast<int>(rng() % 5);
            spac[ax] = 0.5 + (rng() % 4) * 0.25;
        }
        const bool real = trial % 2 == 0;
        const MultiField f = testutil::random_field(GridSpec(sizes, spac), 1 + rng() % 3, 1 + rng() % 3,
                                                    real, 100 + trial);
        const std::string bytes = to_bytes(f);
        const MultiField g = from_bytes(bytes);
        REQUIRE(g.grid() == f.grid());
        REQUIRE(g.nvars() == f.nvars());
        REQUIRE(g.nreps() == f.nreps());
        REQUIRE(g.real_valued() == f.real_valued());
        REQUIRE(g.values() == f.values());  // bit-exact
        REQUIRE(to_bytes(g) == bytes);
    }
}

TEST_CASE("MFLD1 2x2 single variable value section") {
    MultiField f(GridSpec({2, 2}, {1.0, 1.0}), 1, 1, true);
    f.value(0, 0, 0) = 1.5;
    f.value(0, 0, 1) = -2.25;
    f.value(0, 0, 2) = 0.0;
    f.value(0, 0, 3) = 1e-300;
    const std::string bytes = to_bytes(f);
    const MultiField g = from_bytes(bytes);
    REQUIRE(g.values() == f.values());
}

TEST_CASE("MFLD1 error reporting is distinct per failure") {
    MultiField f(GridSpec({2, 2}, {1.0, 1.0}), 1, 1, true);
    std::string bytes = to_bytes(f);

    SECTION("size mismatch: header claims more values than present") {
        bytes.resize(bytes.size() - 8);  // drop one float64
        REQUIRE_THROWS_AS(from_bytes(bytes), FieldSizeError);
    }
    SECTION("size mismatch: trailing bytes") {
        bytes += std::string(8, '\0');
        REQUIRE_THROWS_AS(from_bytes(bytes), FieldSizeError);
    }
    SECTION("unknown magic string") {
        const auto pos = bytes.find("MFLD1");
        bytes.replace(pos, 5, "XYZW1");
        REQUIRE_THROWS_AS(from_bytes(bytes), FieldFormatError);
    }
    SECTION("unsupported version") {
        const auto pos = bytes.find("MFLD1");
        bytes.replace(pos, 5, "MFLD9");
        REQUIRE_THROWS_AS(from_bytes(bytes), FieldVersionError);
    }
    SECTION("header not JSON") {
        REQUIRE_THROWS_AS(from_bytes("not json\n"), FieldFormatError);
    }
}

TEST_CASE("CSV import") {
    SECTION("rows in any order reconstruct the field") {
        std::string csv =
            "rep,var,i1,i2,re\n"
            "0,0,1,0,3.0\n"
            "0,0,0,1,2.0\n"
            "0,0,1,1,4.0\n"
            "0,0,0,0,1.0\n";
        std::istringstream is(csv);
        const MultiField f = read_field_csv(is);
        REQUIRE(f.grid().sizes() == std::vector<int>{2, 2});
        REQUIRE(f.real_valued());
        REQUIRE(f.value(0, 0, 0).real() == 1.0);
        REQUIRE(f.value(0, 0, 1).real() == 2.0);
        REQUIRE(f.value(0, 0, 2).real() == 3.0);
        REQUIRE(f.value(0, 0, 3).real() == 4.0);
    }
    SECTION("complex column") {
        std::string csv = "rep,var,i1,re,im\n0,0,0,1.0,-1.0\n0,0,1,2.0,0.5\n";
        std::istringstream is(csv);
        const MultiField f = read_field_csv(is);
        REQUIRE_FALSE(f.real_valued());
        REQUIRE(f.value(0, 0, 0) == std::complex<double>(1.0, -1.0));
    }
    SECTION("missing cell is an error") {
        std::string csv = "rep,var,i1,re\n0,0,0,1.0\n0,0,2,3.0\n";  // index 1 absent
        std::istringstream is(csv);
        REQUIRE_THROWS_AS(read_field_csv(is), FieldSizeError);
    }
    SECTION("duplicate cell is an error") {
        std::string csv = "rep,var,i1,re\n0,0,0,1.0\n0,0,0,2.0\n";
        std::istringstream is(csv);
        REQUIRE_THROWS_AS(read_field_csv(is), FieldSizeError);
    }
    SECTION("ragged row is an error") {
        std::string csv = "rep,var,i1,re\n0,0,0\n";
        std::istringstream is(csv);
        REQUIRE_THROWS_AS(read_field_csv(is), FieldFormatError);
    }
}
