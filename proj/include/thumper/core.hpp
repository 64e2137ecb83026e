#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace thumper {

inline constexpr int kNumSolenoids = 7;
inline constexpr int kCenterSolenoid = 2;
inline constexpr double kMinDurationMs = 8.0;
inline constexpr double kMaxDurationMs = 25.0;

/// Upward face of a six-sided die, always in 1..6.
class DieFace {
public:
    explicit DieFace(int value);

    int value() const noexcept { return value_; }
    DieFace opposite() const noexcept { return DieFace(7 - value_, Unchecked{}); }

    friend bool operator==(DieFace, DieFace) = default;
    friend auto operator<=>(DieFace, DieFace) = default;

private:
    struct Unchecked {};
    constexpr DieFace(int value, Unchecked) noexcept : value_(value) {}

    int value_;
};

/// Normalizes an angle in degrees into [0, 360).
double normalize_degrees(double degrees) noexcept;

/// Smallest absolute difference of two headings, in [0, 180].
double wrap_angle_diff(double a, double b) noexcept;

/// Planar pose in millimeters with heading in degrees. The heading is the
/// world direction of the die's own east axis.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    /// Builds a pose with theta normalized; throws on non-finite input.
    static Pose make(double x, double y, double theta);

    friend bool operator==(const Pose&, const Pose&) = default;
};

enum class RollDirection { North, East, South, West };

/// Full labeling of a die: which face is up, and which faces point along
/// the die's own north and east axes. Right-handed with (1, 2, 3) canonical.
class CubeOrientation {
public:
    CubeOrientation(DieFace top, DieFace north, DieFace east);

    static CubeOrientation canonical() { return {DieFace(1), DieFace(2), DieFace(3)}; }
    /// The labeling used whenever only the top face and heading are known.
    static CubeOrientation upright(DieFace top);
    /// All 24 rotations reachable from the canonical labeling.
    static const std::vector<CubeOrientation>& all();

    DieFace top() const noexcept { return top_; }
    DieFace north() const noexcept { return north_; }
    DieFace east() const noexcept { return east_; }

    /// Quarter turn of the die's own frame about the vertical axis: the
    /// same body described with axes rotated +90 degrees.
    CubeOrientation relabel_ccw() const noexcept;

    friend bool operator==(const CubeOrientation&, const CubeOrientation&) = default;

private:
    DieFace top_;
    DieFace north_;
    DieFace east_;
};

/// Orientation after tipping the die one quarter turn over its edge toward `dir`.
CubeOrientation roll(const CubeOrientation& o, RollDirection dir) noexcept;

std::string to_string(RollDirection dir);

/// Resting die: face, planar pose and the full labeling whose top is the face.
class DieState {
public:
    DieState(CubeOrientation orientation, Pose pose) : orientation_(orientation), pose_(pose) {}
    /// From face and pose only; the labeling is the upright one for the face.
    DieState(DieFace face, Pose pose) : orientation_(CubeOrientation::upright(face)), pose_(pose) {}

    DieFace face() const noexcept { return orientation_.top(); }
    const Pose& pose() const noexcept { return pose_; }
    const CubeOrientation& orientation() const noexcept { return orientation_; }

    friend bool operator==(const DieState&, const DieState&) = default;

private:
    CubeOrientation orientation_;
    Pose pose_;
};

/// One impulse: which solenoid is fired and for how long.
struct Action {
    int solenoid = 0;
    double duration_ms = kMinDurationMs;

    static Action make(int solenoid, double duration_ms);
    bool valid() const noexcept;

    friend bool operator==(const Action&, const Action&) = default;
};

struct AnyOtherFace {
    DieFace reference;
    friend bool operator==(const AnyOtherFace&, const AnyOtherFace&) = default;
};

struct TargetFace {
    DieFace target;
    friend bool operator==(const TargetFace&, const TargetFace&) = default;
};

using GoalSpec = std::variant<AnyOtherFace, TargetFace>;

bool goal_satisfied(const GoalSpec& goal, const DieState& state) noexcept;
bool goal_satisfied(const GoalSpec& goal, DieFace face) noexcept;

std::string describe(const GoalSpec& goal);

}  // namespace thumper
