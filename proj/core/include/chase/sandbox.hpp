#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace chase {

struct SandboxLimits {
    std::int64_t wall_ms = 10000;
    bool keep_workspace = false;  // keep-for-debug
    std::size_t max_capture_bytes = 1 << 20;
};

enum class ExecStatus { pass, assertion_fail, runtime_error, timeout };
std::string exec_status_name(ExecStatus s);

struct ExecResult {
    ExecStatus status = ExecStatus::runtime_error;
    std::string stdout_text;
    std::string stderr_text;
    std::int64_t wall_ms = 0;
};

// Freshly created directory populated from a relative-path -> content map.
// Deleted on destruction unless released.
class Workspace {
public:
    static Workspace materialize(const std::map<std::string, std::string>& files);
    ~Workspace();

    Workspace(Workspace&& other) noexcept;
    Workspace& operator=(Workspace&&) = delete;
    Workspace(const Workspace&) = delete;

    const std::string& root() const { return root_; }
    void keep() { keep_ = true; }

private:
    explicit Workspace(std::string root) : root_(std::move(root)) {}
    std::string root_;
    bool keep_ = false;
};

// Runs `interpreter entry_file` with cwd = workspace root, scrubbed
// environment, and a wall-clock limit. Exit 0 within the limit is a pass;
// an assertion signature in stderr maps nonzero exits to assertion_fail.
// A global semaphore caps simultaneous children at the CPU count.
ExecResult execute(const Workspace& workspace, const std::string& interpreter,
                   const std::string& entry_file, const SandboxLimits& limits = {});

}  // namespace chase
