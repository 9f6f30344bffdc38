package demo;

/**
 * Javadoc.
 */
public class Service {
    private static final String Q = """
        SELECT *
        -- comment?
        """;

    // getter
    public String q() { return Q; }
    int x = '"'; // char
}
