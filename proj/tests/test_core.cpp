#include <doctest.h>

#include "qrs/core.hpp"

using namespace qrs;

namespace {

Topology chain3() {
    Topology t;
    for (StationId i = 0; i < 3; ++i) {
        Station st;
        st.id = i;
        st.kind = i == 1 ? StationKind::router : StationKind::host;
        st.capacity_bps = 2'000'000;
        st.available_bps = st.capacity_bps;
        t.stations.push_back(st);
    }
    t.links.push_back({0, 1, 2'000'000, 0.001, 400});
    t.links.push_back({1, 2, 2'000'000, 0.001, 400});
    return t;
}

}  // namespace

TEST_CASE("validate_path accepts a linked chain") {
    Topology t = chain3();
    CHECK(validate_path(Path{{0, 1, 2}}, t));
}

TEST_CASE("validate_path rejects a missing edge") {
    Topology t = chain3();
    CHECK_FALSE(validate_path(Path{{0, 2}}, t));
}

TEST_CASE("validate_path rejects repeated stations") {
    Topology t = chain3();
    CHECK_FALSE(validate_path(Path{{0, 1, 0}}, t));
}

TEST_CASE("validate_path rejects short and unknown-station paths") {
    Topology t = chain3();
    CHECK_FALSE(validate_path(Path{{0}}, t));
    CHECK_FALSE(validate_path(Path{{0, 7}}, t));
}

TEST_CASE("path_less orders by hop count then sequence") {
    CHECK(path_less(Path{{0, 1}}, Path{{0, 1, 2}}));
    CHECK(path_less(Path{{0, 1, 3}}, Path{{0, 2, 1}}));
    CHECK_FALSE(path_less(Path{{0, 2}}, Path{{0, 1}}));
}

TEST_CASE("topology helpers") {
    Topology t = chain3();
    CHECK(t.link_between(1, 0).has_value());
    CHECK_FALSE(t.link_between(0, 2).has_value());
    CHECK(t.neighbors(1) == std::vector<StationId>{0, 2});
    CHECK(Path{{0, 1, 2}}.position_of(1) == std::size_t{1});
    CHECK_FALSE(Path{{0, 1, 2}}.position_of(9).has_value());
}
