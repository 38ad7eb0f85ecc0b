#include "dronecine/framing.hpp"

#include "doctest.h"

#include <Eigen/Geometry>

#include <random>

using namespace dronecine;

namespace {

const CameraIntrinsics kCam{};

ActorState actor(const char* id, Vec3 pos, double facing = 0.0, double height = 1.8) {
    return ActorState{id, pos, facing, height};
}

// Circumradius of a triangle: |AB| |BC| |CA| / (4 area). Independent of the
// toric construction.
double circumradius(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double area = 0.5 * (b - a).cross(c - a).norm();
    return (b - a).norm() * (c - b).norm() * (a - c).norm() / (4.0 * area);
}

double subtended(const Vec3& cam, const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp((a - cam).normalized().dot((b - cam).normalized()), -1.0, 1.0));
}

}  // namespace

TEST_CASE("size_to_distance") {
    CHECK(size_to_distance(psl::ShotSize::MS, kCam) == doctest::Approx(1.0392).epsilon(1e-4));
    CHECK(size_to_distance(psl::ShotSize::FS, kCam) == doctest::Approx(2.0785).epsilon(1e-4));

    // Oracle: a frame-height segment at that range spans the image exactly.
    for (auto size : {psl::ShotSize::CU, psl::ShotSize::MS, psl::ShotSize::FS, psl::ShotSize::LS}) {
        const double d = size_to_distance(size, kCam);
        Pose cam;
        cam.position = {0, -d, 0};
        const double h = frame_height(size);
        CHECK(project(cam, {0, 0, h / 2}, kCam).screen.y() == doctest::Approx(1.0));
        CHECK(project(cam, {0, 0, -h / 2}, kCam).screen.y() == doctest::Approx(-1.0));
    }

    // Doubling tan(vfov/2) halves the distance.
    CameraIntrinsics wide = kCam;
    wide.vfov = 2.0 * std::atan(2.0 * std::tan(kCam.vfov / 2.0));
    CHECK(size_to_distance(psl::ShotSize::MLS, wide) == doctest::Approx(size_to_distance(psl::ShotSize::MLS, kCam) / 2));
}

TEST_CASE("resolve_spec defaults and conflicts") {
    const double d_ms = size_to_distance(psl::ShotSize::MS, kCam);
    auto p = resolve_spec(psl::parse("MS on A front"), kCam);
    CHECK(p.profile == 0.0);
    CHECK(p.vertical == 0.0);
    REQUIRE(p.screen.size() == 1);
    CHECK(p.screen[0] == Vec2(0, 0));
    CHECK(p.size_distance == doctest::Approx(d_ms));

    p = resolve_spec(psl::parse("MS on A 34left screencenter"), kCam);
    CHECK(p.profile == doctest::Approx(deg2rad(45)));
    CHECK(p.screen[0] == Vec2(0, 0));

    p = resolve_spec(psl::parse("MS on A 34backright high screenright"), kCam);
    CHECK(p.profile == doctest::Approx(deg2rad(-135)));
    CHECK(p.vertical == doctest::Approx(deg2rad(30)));
    CHECK(p.screen[0].x() == doctest::Approx(0.3));

    // Two subjects default to (screenleft, screenright) in subject order.
    p = resolve_spec(psl::parse("MS on A and B"), kCam);
    CHECK(p.screen[0].x() == doctest::Approx(-0.3));
    CHECK(p.screen[1].x() == doctest::Approx(0.3));

    // The later conflicting constraint is dropped and replaced by its default.
    p = resolve_spec(psl::parse("MS on A screenleft and B screenleft"), kCam);
    CHECK(p.screen[0].x() == doctest::Approx(-0.3));
    CHECK(p.screen[1].x() == doctest::Approx(0.3));
    {
        std::vector<ActorState> scene{actor("A", {-1, 0, 0}), actor("B", {1, 0, 0})};
        const Pose cam = toric_place(scene[0], scene[1], p, kCam);
        const double xa = project(cam, aim_point(scene[0]), kCam).screen.x();
        const double xb = project(cam, aim_point(scene[1]), kCam).screen.x();
        CHECK(std::abs(xa - xb) > 0.5);
    }

    p = resolve_spec(psl::parse("MS on A screenright and B screenright"), kCam);
    CHECK(p.screen[0].x() == doctest::Approx(0.3));
    CHECK(p.screen[1].x() == doctest::Approx(-0.3));

    // An explicit constraint on B moves A's default out of the way.
    p = resolve_spec(psl::parse("MS on A and B screenleft"), kCam);
    CHECK(p.screen[0].x() == doctest::Approx(0.3));
    CHECK(p.screen[1].x() == doctest::Approx(-0.3));

    // A later vertical constraint on B loses against A's.
    p = resolve_spec(psl::parse("MS on A low and B high"), kCam);
    CHECK(p.vertical == doctest::Approx(deg2rad(-30)));

    std::vector<ActorState> scene{actor("A", {0, 0, 0})};
    CHECK_THROWS_AS(resolve_spec(psl::parse("MS on Q front"), kCam, scene), FramingError);
    CHECK_NOTHROW(resolve_spec(psl::parse("MS on A front"), kCam, scene));
}

TEST_CASE("project") {
    Pose cam;
    CHECK(project(cam, {0, 3, 0}, kCam).screen.norm() < 1e-12);
    CHECK(project(cam, {0, -1, 0}, kCam).behind);
    CHECK(project(cam, {0, 1, kCam.tan_half_v()}, kCam).screen.y() == doctest::Approx(1.0));
    CHECK(project(cam, {kCam.tan_half_h(), 1, 0}, kCam).screen.x() == doctest::Approx(1.0));
    // Tilted down 30 degrees: a point on the tilted axis is centred.
    cam.tilt = deg2rad(30);
    CHECK(project(cam, {0, std::cos(cam.tilt), -std::sin(cam.tilt)}, kCam).screen.norm() < 1e-12);
}

TEST_CASE("sphere_place examples") {
    const ActorState a = actor("A", {0, 0, 0});
    auto p = resolve_spec(psl::parse("MS on A front"), kCam);
    const Pose cam = sphere_place(a, p, kCam);
    CHECK((cam.position - Vec3(0, 1.0392304845, 1.35)).norm() < 1e-9);
    CHECK(std::abs(wrap_angle(cam.course - kPi)) < 1e-12);
    CHECK(cam.tilt == doctest::Approx(0.0));
    CHECK(project(cam, aim_point(a), kCam).screen.norm() < 1e-9);

    p.vertical = deg2rad(30);
    const Pose high = sphere_place(a, p, kCam);
    CHECK(high.position.z() == doctest::Approx(1.8696152423));
    CHECK(std::hypot(high.position.x(), high.position.y()) == doctest::Approx(0.9));
    CHECK(project(high, aim_point(a), kCam).screen.norm() < 1e-9);

    p.vertical = 0;
    p.screen[0] = Vec2(-0.3, 0);
    const Pose left = sphere_place(a, p, kCam);
    CHECK((left.position - cam.position).norm() < 1e-12);
    CHECK(std::abs(angle_diff(left.course, cam.course)) == doctest::Approx(std::atan(0.3 * kCam.tan_half_h())));
    CHECK(project(left, aim_point(a), kCam).screen.x() == doctest::Approx(-0.3));

    // 34backright puts the camera behind the actor on its right (+x for a +y facing actor).
    const Pose back = sphere_place(a, resolve_spec(psl::parse("MS on A 34backright"), kCam), kCam);
    CHECK(back.position.x() > 0.5);
    CHECK(back.position.y() < -0.5);
    // 34left puts it in front on the actor's left (-x).
    const Pose l34 = sphere_place(a, resolve_spec(psl::parse("MS on A 34left"), kCam), kCam);
    CHECK(l34.position.x() < -0.5);
    CHECK(l34.position.y() > 0.5);
}

TEST_CASE("toric_alpha") {
    CHECK(rad2deg(toric_alpha(0.3, -0.3, kCam)) == doctest::Approx(34.23).epsilon(1e-3));
    CHECK(toric_alpha(0.3, -0.3, kCam) == doctest::Approx(2 * std::atan(0.3 * 1.0264004)).epsilon(1e-6));
    CHECK_THROWS_AS(toric_alpha(0.1, 0.1, kCam), FramingError);
    CHECK(toric_alpha(0.6, -0.6, kCam) > toric_alpha(0.3, -0.3, kCam));
}

TEST_CASE("toric_place examples") {
    // Aim points at (-1,0,0) and (1,0,0): actors with zero height offset.
    ActorState a = actor("A", {-1, 0, -1.35});
    ActorState b = actor("B", {1, 0, -1.35});
    auto props = resolve_spec(psl::parse("MS on A screenleft and B screenright"), kCam);
    const Pose cam = toric_place(a, b, props, kCam);
    const double alpha = toric_alpha(-0.3, 0.3, kCam);

    CHECK(circumradius(aim_point(a), aim_point(b), cam.position) == doctest::Approx(1.7779).epsilon(1e-4));
    CHECK(std::abs(subtended(cam.position, aim_point(a), aim_point(b)) - alpha) < 1e-9);
    CHECK(std::abs(project(cam, aim_point(a), kCam).screen.x() + 0.3) < 0.02);
    CHECK(std::abs(project(cam, aim_point(b), kCam).screen.x() - 0.3) < 0.02);
    CHECK(cam.position.z() == doctest::Approx(0.0));  // v = 0, level actors
    CHECK((cam.position - aim_point(a)).norm() == doctest::Approx(props.size_distance));

    // Reverse over-the-shoulder: the mirror image through the bisector plane
    // of AB, staying on the same side of the line of action.
    std::vector<ActorState> ba{b, a};
    auto rev = resolve_spec(psl::parse("MS on B screenright and A screenleft"), kCam);
    const Pose cam2 = place(ba, rev, kCam);
    CHECK(std::abs(cam2.position.x() + cam.position.x()) < 1e-9);
    CHECK(std::abs(cam2.position.y() - cam.position.y()) < 1e-9);
    const Vec3 ab = aim_point(b) - aim_point(a);
    CHECK(ab.dot(cam.position) * ab.dot(cam2.position) < 0);            // opposite ends
    CHECK(ab.cross(cam.position).z() * ab.cross(cam2.position).z() > 0);  // same side of the line
    CHECK(std::abs(project(cam2, aim_point(a), kCam).screen.x() + 0.3) < 0.02);
    CHECK(std::abs(project(cam2, aim_point(b), kCam).screen.x() - 0.3) < 0.02);

    // Swapping screen order crosses the line of action.
    auto swapped = resolve_spec(psl::parse("MS on A screenright and B screenleft"), kCam);
    const Pose cam3 = toric_place(a, b, swapped, kCam);
    CHECK(cam3.position.y() * cam.position.y() < 0);

    CHECK_THROWS_AS(toric_place(a, a, props, kCam), FramingError);
}

TEST_CASE("toric radius grows with separation at constant alpha") {
    auto props = resolve_spec(psl::parse("MS on A screenleft and B screenright"), kCam);
    const double alpha = toric_alpha(-0.3, 0.3, kCam);
    for (double half : {0.5, 1.0, 2.0, 3.5}) {
        ActorState a = actor("A", {-half, 0, 0});
        ActorState b = actor("B", {half, 0, 0});
        const Pose cam = toric_place(a, b, props, kCam);
        const double expected = 2 * half / (2 * std::sin(alpha));
        CHECK(circumradius(aim_point(a), aim_point(b), cam.position) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("world_to_manifold inverts placement") {
    const ActorState a = actor("A", {0.5, -0.2, 0}, 0.3);
    std::vector<ActorState> one{a};

    // Directly behind at distance d -> profile 180 degrees.
    Pose cam;
    cam.position = aim_point(a) - 2.0 * course_forward(a.facing);
    cam.course = a.facing;
    auto p = world_to_manifold(cam, one, kCam);
    CHECK(std::abs(wrap_angle(p.profile - kPi)) < 1e-9);
    CHECK(p.size_distance == doctest::Approx(2.0));
    CHECK(p.screen[0].norm() < 1e-9);

    cam.position = aim_point(a);
    CHECK_THROWS_AS(world_to_manifold(cam, one, kCam), FramingError);
}

TEST_CASE("property: sphere placement contracts over random properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 500; ++i) {
        const ActorState a = actor("A", {3 * u(rng), 3 * u(rng), 0}, kPi * u(rng), 1.5 + 0.3 * u(rng));
        std::vector<ActorState> one{a};
        FramingProperties p;
        p.screen = {Vec2(0.9 * u(rng), 0.5 * u(rng))};
        p.vertical = deg2rad(25) * u(rng);
        p.profile = kPi * u(rng);
        p.size_distance = 0.5 + 4 * std::abs(u(rng));
        const Pose cam = sphere_place(a, p, kCam);
        CHECK(std::abs((cam.position - aim_point(a)).norm() - p.size_distance) < 1e-9);
        const Projection pr = project(cam, aim_point(a), kCam);
        REQUIRE_FALSE(pr.behind);
        CHECK((pr.screen - p.screen[0]).norm() < 1e-6);

        // Screen changes never move the camera.
        FramingProperties q = p;
        q.screen[0] = Vec2(0.5 * u(rng), 0.5 * u(rng));
        CHECK((sphere_place(a, q, kCam).position - cam.position).norm() < 1e-12);

        const FramingProperties back = world_to_manifold(cam, one, kCam);
        CHECK(std::abs(wrap_angle(back.profile - p.profile)) < 1e-6);
        CHECK(std::abs(back.vertical - p.vertical) < 1e-6);
        CHECK(std::abs(back.size_distance - p.size_distance) < 1e-6);
        CHECK((back.screen[0] - p.screen[0]).norm() < 1e-6);
    }
}

TEST_CASE("property: random camera -> properties -> placement reproduces position") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 300; ++i) {
        const ActorState a = actor("A", {u(rng), u(rng), 0}, kPi * u(rng));
        const ActorState b = actor("B", {4 + u(rng), 2 * u(rng), 0.2 * u(rng)}, kPi * u(rng));
        Pose cam;
        cam.position = Vec3(2 + 3 * u(rng), 3 * u(rng), 1.35 + 0.8 * u(rng));
        cam.course = kPi * u(rng);
        cam.tilt = 0.3 * u(rng);

        std::vector<ActorState> one{a};
        if ((cam.position - aim_point(a)).norm() > 0.2) {
            const FramingProperties p1 = world_to_manifold(cam, one, kCam);
            const double elev = std::asin((cam.position - aim_point(a)).normalized().z());
            if (std::abs(elev) < kMaxVertical) {
                CHECK((sphere_place(a, p1, kCam).position - cam.position).norm() < 1e-6);
            }
        }

        std::vector<ActorState> two{a, b};
        const ManifoldPoint m = manifold_point(cam, two, kCam);
        if (std::abs(m.v) < kMaxVertical && m.scale < 2 * std::atan(kCam.tan_half_h()) * 0.95 && m.scale > 0.05) {
            const FramingProperties p2 = world_to_manifold(cam, two, kCam);
            const Pose placed = toric_place(a, b, p2, kCam);
            CHECK((placed.position - cam.position).norm() < 1e-6);
        }
    }
}

TEST_CASE("property: two-subject placement meets screen and toric contracts") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> pick(0, 1 << 20);
    const char* sizes[] = {"CU", "MCU", "MS", "MLS", "FS", "LS"};
    const char* verticals[] = {"", " high", " eye", " low"};
    const char* screens[] = {"", " screenleft", " screencenter", " screenright"};
    for (int i = 0; i < 300; ++i) {
        const std::string text = std::string(sizes[pick(rng) % 6]) + " on A" + verticals[pick(rng) % 4] +
                                 screens[pick(rng) % 4] + " and B" + screens[pick(rng) % 4];
        CAPTURE(text);
        const ActorState a = actor("A", {u(rng), u(rng), 0}, kPi * u(rng), 1.6 + 0.2 * u(rng));
        const ActorState b = actor("B", {a.position.x() + 1 + 3 * std::abs(u(rng)), 3 * u(rng), 0}, kPi * u(rng), 1.6 + 0.2 * u(rng));
        const FramingProperties p = resolve_spec(psl::parse(text), kCam);
        const Pose cam = toric_place(a, b, p, kCam);
        const double alpha = toric_alpha(p.screen[0].x(), p.screen[1].x(), kCam);
        CHECK(std::abs(subtended(cam.position, aim_point(a), aim_point(b)) - alpha) < 1e-6);
        const Projection pa = project(cam, aim_point(a), kCam);
        const Projection pb = project(cam, aim_point(b), kCam);
        CHECK_FALSE(pa.behind);
        CHECK_FALSE(pb.behind);
        CHECK(std::abs(pa.screen.x() - p.screen[0].x()) < 0.02);
        CHECK(std::abs(pb.screen.x() - p.screen[1].x()) < 0.02);
    }
}
