#pragma once

#include <stdexcept>
#include <string>

namespace mes {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A state or stage derivative contained NaN/Inf.
class NonFiniteState : public Error {
  public:
    NonFiniteState(double t, const std::string& what)
        : Error(what + " at t=" + std::to_string(t)), time_(t) {}
    double time() const noexcept { return time_; }

  private:
    double time_;
};

// Coil current fell below the controller's guard (the law divides by i).
class CurrentSingularity : public Error {
  public:
    explicit CurrentSingularity(double current)
        : Error("coil current " + std::to_string(current) + " A below singularity guard"),
          current_(current) {}
    double current() const noexcept { return current_; }

  private:
    double current_;
};

class NonHurwitzGains : public Error {
  public:
    using Error::Error;
};

class SingularSystem : public Error {
  public:
    using Error::Error;
};

// An episode could not be completed. Carries where it broke down.
class EpisodeDiverged : public Error {
  public:
    EpisodeDiverged(int iteration, double t, const std::string& cause)
        : Error("episode " + std::to_string(iteration) + " diverged at t=" + std::to_string(t) +
                ": " + cause),
          iteration_(iteration), time_(t) {}
    int iteration() const noexcept { return iteration_; }
    double time() const noexcept { return time_; }

  private:
    int iteration_;
    double time_;
};

} // namespace mes
