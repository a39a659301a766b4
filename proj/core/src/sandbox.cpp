#include "chase/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace chase {

std::string exec_status_name(ExecStatus s) {
    switch (s) {
        case ExecStatus::pass: return "pass";
        case ExecStatus::assertion_fail: return "assertion_fail";
        case ExecStatus::runtime_error: return "runtime_error";
        case ExecStatus::timeout: return "timeout";
    }
    return "?";
}

namespace {

bool path_escapes(const fs::path& rel) {
    if (rel.is_absolute()) return true;
    int depth = 0;
    for (const auto& part : rel) {
        if (part == "..") {
            if (--depth < 0) return true;
        } else if (part != "." && !part.empty()) {
            ++depth;
        }
    }
    return false;
}

std::string unique_root() {
    static std::atomic<std::uint64_t> counter{0};
    auto pid = static_cast<std::uint64_t>(::getpid());
    auto n = counter.fetch_add(1);
    return (fs::temp_directory_path() /
            ("chase-ws-" + std::to_string(pid) + "-" + std::to_string(n)))
        .string();
}

// Caps simultaneous child processes.
class ChildSemaphore {
public:
    ChildSemaphore() : slots_(std::max(1u, std::thread::hardware_concurrency())) {}
    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }
    void release() {
        std::lock_guard<std::mutex> lock(mu_);
        ++slots_;
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    unsigned slots_;
};

ChildSemaphore& child_semaphore() {
    static ChildSemaphore s;
    return s;
}

}  // namespace

Workspace Workspace::materialize(const std::map<std::string, std::string>& files) {
    for (const auto& [rel, _] : files) {
        if (path_escapes(fs::path(rel)))
            throw std::invalid_argument("workspace path escapes root: " + rel);
    }
    std::string root = unique_root();
    fs::create_directories(root);
    Workspace ws(root);
    for (const auto& [rel, content] : files) {
        fs::path target = fs::path(root) / rel;
        fs::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary);
        out << content;
    }
    return ws;
}

Workspace::Workspace(Workspace&& other) noexcept : root_(std::move(other.root_)), keep_(other.keep_) {
    other.root_.clear();
}

Workspace::~Workspace() {
    if (!root_.empty() && !keep_) {
        std::error_code ec;
        fs::remove_all(root_, ec);
    }
}

ExecResult execute(const Workspace& workspace, const std::string& interpreter,
                   const std::string& entry_file, const SandboxLimits& limits) {
    if (!fs::exists(fs::path(workspace.root()) / entry_file))
        throw std::invalid_argument("entry file missing from workspace: " + entry_file);

    child_semaphore().acquire();
    struct Release {
        ~Release() { child_semaphore().release(); }
    } release;

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw std::runtime_error("pipe() failed");

    auto start = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork() failed");
    if (pid == 0) {
        // Child: own process group so the whole tree can be killed.
        setpgid(0, 0);
        if (chdir(workspace.root().c_str()) != 0) _exit(127);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        // Scrubbed environment: no credentials or proxy settings leak in.
        const char* path = getenv("PATH");
        std::string path_kv = std::string("PATH=") + (path ? path : "/usr/bin:/bin");
        std::string home_kv = "HOME=" + workspace.root();
        char* envp[] = {path_kv.data(), home_kv.data(), nullptr};
        char* argv[] = {const_cast<char*>(interpreter.c_str()),
                        const_cast<char*>(entry_file.c_str()), nullptr};
        execvpe(interpreter.c_str(), argv, envp);
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    ExecResult result;
    bool timed_out = false;
    bool out_open = true, err_open = true;
    int status = 0;
    bool exited = false;
    std::int64_t exited_at = -1;

    auto drain = [&](int fd, std::string& sink, bool& open_flag) {
        char buf[4096];
        while (true) {
            ssize_t n = read(fd, buf, sizeof buf);
            if (n > 0) {
                if (sink.size() < limits.max_capture_bytes) {
                    std::size_t take =
                        std::min(static_cast<std::size_t>(n), limits.max_capture_bytes - sink.size());
                    sink.append(buf, take);
                    if (sink.size() == limits.max_capture_bytes) sink += "\n[truncated]";
                }
            } else if (n == 0) {
                open_flag = false;
                return;
            } else {
                return;  // EAGAIN
            }
        }
    };

    while (true) {
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
        if (!timed_out && elapsed >= limits.wall_ms) {
            timed_out = true;
            kill(-pid, SIGKILL);
        }
        struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
        poll(fds, 2, 50);
        if (out_open) drain(out_pipe[0], result.stdout_text, out_open);
        if (err_open) drain(err_pipe[0], result.stderr_text, err_open);
        if (!exited) {
            pid_t r = waitpid(pid, &status, WNOHANG);
            if (r == pid) {
                exited = true;
                exited_at = elapsed;
            }
        }
        if (exited && !out_open && !err_open) break;
        if (exited && timed_out) break;
        // Orphaned grandchildren may keep the pipes open; don't wait on them.
        if (exited && elapsed - exited_at > 500) break;
    }
    if (out_open) drain(out_pipe[0], result.stdout_text, out_open);
    if (err_open) drain(err_pipe[0], result.stderr_text, err_open);
    close(out_pipe[0]);
    close(err_pipe[0]);

    result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    if (timed_out) {
        result.status = ExecStatus::timeout;
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        result.status = ExecStatus::pass;
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
        throw std::runtime_error("interpreter not executable: " + interpreter);
    } else if (result.stderr_text.find("AssertionError") != std::string::npos) {
        result.status = ExecStatus::assertion_fail;
    } else {
        result.status = ExecStatus::runtime_error;
    }
    return result;
}

}  // namespace chase
