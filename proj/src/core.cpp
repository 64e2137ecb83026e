#include "thumper/core.hpp"

#include <algorithm>
#include <cmath>

namespace thumper {

namespace {

using Vec3 = std::array<int, 3>;

// Body-axis direction of each face in the canonical labeling (1 up, 2 north, 3 east).
Vec3 face_axis(int face) noexcept
{
    switch (face) {
        case 1: return {0, 0, 1};
        case 6: return {0, 0, -1};
        case 2: return {0, 1, 0};
        case 5: return {0, -1, 0};
        case 3: return {1, 0, 0};
        default: return {-1, 0, 0};
    }
}

Vec3 cross(const Vec3& a, const Vec3& b) noexcept
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

DieFace::DieFace(int value) : value_(value)
{
    if (value < 1 || value > 6)
        throw std::invalid_argument("die face out of range: " + std::to_string(value));
}

double normalize_degrees(double degrees) noexcept
{
    double t = std::fmod(degrees, 360.0);
    if (t < 0.0)
        t += 360.0;
    // fmod of a tiny negative value can round up to exactly 360
    if (t >= 360.0)
        t = 0.0;
    return t;
}

double wrap_angle_diff(double a, double b) noexcept
{
    double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

Pose Pose::make(double x, double y, double theta)
{
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
        throw std::invalid_argument("pose components must be finite");
    return Pose{x, y, normalize_degrees(theta)};
}

CubeOrientation::CubeOrientation(DieFace top, DieFace north, DieFace east)
    : top_(top), north_(north), east_(east)
{
    // A labeling is a rotation iff east x north gives top (right-handed axes).
    if (cross(face_axis(east.value()), face_axis(north.value())) != face_axis(top.value()))
        throw std::invalid_argument("orientation (" + std::to_string(top.value()) + "," +
                                    std::to_string(north.value()) + "," +
                                    std::to_string(east.value()) + ") is not a die rotation");
}

CubeOrientation CubeOrientation::upright(DieFace top)
{
    for (const auto& o : all()) {
        if (o.top() != top)
            continue;
        int lowest = 7;
        for (int f = 1; f <= 6; ++f) {
            if (f != top.value() && f != top.opposite().value()) {
                lowest = f;
                break;
            }
        }
        if (o.north().value() == lowest)
            return o;
    }
    throw std::logic_error("no upright labeling");
}

const std::vector<CubeOrientation>& CubeOrientation::all()
{
    static const std::vector<CubeOrientation> table = [] {
        std::vector<CubeOrientation> out;
        for (int top = 1; top <= 6; ++top)
            for (int north = 1; north <= 6; ++north)
                for (int east = 1; east <= 6; ++east) {
                    try {
                        out.emplace_back(DieFace(top), DieFace(north), DieFace(east));
                    } catch (const std::invalid_argument&) {
                    }
                }
        if (out.size() != 24)
            throw std::logic_error("rotation table has wrong size");
        return out;
    }();
    return table;
}

CubeOrientation CubeOrientation::relabel_ccw() const noexcept
{
    CubeOrientation o = *this;
    o.north_ = east_.opposite();
    o.east_ = north_;
    return o;
}

CubeOrientation roll(const CubeOrientation& o, RollDirection dir) noexcept
{
    const DieFace top = o.top(), north = o.north(), east = o.east();
    switch (dir) {
        case RollDirection::North: return {north.opposite(), top, east};
        case RollDirection::South: return {north, top.opposite(), east};
        case RollDirection::East: return {east.opposite(), north, top};
        case RollDirection::West: return {east, north, top.opposite()};
    }
    return o;
}

std::string to_string(RollDirection dir)
{
    switch (dir) {
        case RollDirection::North: return "N";
        case RollDirection::East: return "E";
        case RollDirection::South: return "S";
        case RollDirection::West: return "W";
    }
    return "?";
}

Action Action::make(int solenoid, double duration_ms)
{
    Action a{solenoid, duration_ms};
    if (!a.valid())
        throw std::invalid_argument("invalid action: solenoid " + std::to_string(solenoid) +
                                    ", duration " + std::to_string(duration_ms) + " ms");
    return a;
}

bool Action::valid() const noexcept
{
    return solenoid >= 0 && solenoid < kNumSolenoids && duration_ms >= kMinDurationMs &&
           duration_ms <= kMaxDurationMs;
}

bool goal_satisfied(const GoalSpec& goal, DieFace face) noexcept
{
    if (const auto* other = std::get_if<AnyOtherFace>(&goal))
        return face != other->reference;
    return face == std::get<TargetFace>(goal).target;
}

bool goal_satisfied(const GoalSpec& goal, const DieState& state) noexcept
{
    return goal_satisfied(goal, state.face());
}

std::string describe(const GoalSpec& goal)
{
    if (const auto* other = std::get_if<AnyOtherFace>(&goal))
        return "other:" + std::to_string(other->reference.value());
    return "target:" + std::to_string(std::get<TargetFace>(goal).target.value());
}

}  // namespace thumper
