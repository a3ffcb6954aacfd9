var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var m = s.replace(/\/\//g, '/'); // escaped slashes
var s3 = 'it\'s // fine'; // escaped quote
var url = 'http://example.com/a//b'; // trailing note
var d = x++ / 2; /* after postfix */
var r2 = /[/]+/.test('a//b');
// standalone comment 55
var q = a / b / c; // divisions, not regexes
// standalone comment 32
var tpl = `a${`nested ${'//'} tpl`}b`; // nested template
// standalone comment 98
